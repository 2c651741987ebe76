#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace heapforest {

// key = value configuration, one pair per line; '#' starts a comment.
// Keys keep file order (reports echo them back verbatim); duplicates are
// rejected.
class Manifest {
 public:
  static Manifest parse(const std::string& text);
  static Manifest load(const std::string& path);

  bool has(const std::string& key) const;
  const std::string& get(const std::string& key) const;  // throws if missing
  std::string get_or(const std::string& key, const std::string& fallback) const;

  double get_double(const std::string& key) const;
  double get_double_or(const std::string& key, double fallback) const;
  uint64_t get_u64(const std::string& key) const;
  uint64_t get_u64_or(const std::string& key, uint64_t fallback) const;
  bool get_bool_or(const std::string& key, bool fallback) const;
  std::vector<double> get_double_list(const std::string& key) const;
  std::vector<uint64_t> get_u64_list(const std::string& key) const;

  // Rejects keys outside required+optional, naming every offender; also
  // rejects missing required keys.
  void require_keys(const std::vector<std::string>& required,
                    const std::vector<std::string>& optional) const;

  const std::vector<std::pair<std::string, std::string>>& entries() const {
    return entries_;
  }

  void set(const std::string& key, const std::string& value);  // add/replace

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
};

}  // namespace heapforest
