#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "heapforest/distributions.hpp"

namespace heapforest {

inline constexpr uint32_t kNoVertex = std::numeric_limits<uint32_t>::max();
inline constexpr double kNeverDies = std::numeric_limits<double>::infinity();

struct VertexRecord {
  double label = 0.0;
  uint32_t initial_lives = 1;
  uint32_t remaining_lives = 1;
  uint32_t parent = kNoVertex;
  uint32_t arrival_index = 0;
  double birth_time = 0.0;
  double death_time = kNeverDies;  // time the last life was consumed
  uint32_t killer = kNoVertex;     // child whose arrival consumed it
  std::vector<uint32_t> children;
};

struct InsertOutcome {
  uint32_t id = kNoVertex;
  bool created_root = false;
  uint32_t parent = kNoVertex;
};

struct PathPoint {
  double x = 0.0;
  double t = 0.0;
};

struct RightInsertOutcome {
  uint32_t id = kNoVertex;
  bool created_root = false;
  // Staircase corners of the second-class particle, left-up monotone.
  // When the particle exits through the left side the last corner has
  // x = -infinity; otherwise it ends at (father label, horizon).
  std::vector<PathPoint> path;
};

// Heap patience sorting: each item attaches to the alive vertex with the
// largest label below its own (that vertex loses one life) or founds a new
// tree. Keeps the full forest plus birth/death bookkeeping, which makes
// right-boundary growth replayable without re-sorting.
class SortState {
 public:
  explicit SortState(bool track_dead = false);

  // Arrival-order insertion; time is the 1-based arrival index.
  InsertOutcome insert(double label, uint32_t lives);
  // Timed insertion; times must be strictly increasing.
  InsertOutcome insert_at(double label, uint32_t lives, double time);

  // Inserts an atom whose label exceeds every existing label, at a time
  // anywhere within (0, horizon]. Replays the second-class particle over
  // the stored bookkeeping instead of re-sorting: cost is the geometric
  // length of the particle's path. The resulting forest equals a full
  // re-sort of all atoms ordered by time.
  RightInsertOutcome insert_rightmost(const Atom& atom, double horizon);

  std::size_t size() const { return vertices_.size(); }
  uint64_t root_count() const { return root_count_; }

  // Number of leading zeros of the life word: dead vertices strictly below
  // the lowest alive label (all of them if nothing is alive). Requires
  // dead-label tracking, enabled at construction.
  uint64_t leading_dead() const;
  bool tracks_dead() const { return track_dead_; }

  // Remaining lives ordered by increasing label.
  std::vector<uint32_t> life_word() const;

  const std::vector<VertexRecord>& vertices() const { return vertices_; }
  const std::map<double, uint32_t>& alive() const { return alive_; }
  const std::vector<double>& root_times() const { return root_times_; }
  double max_label() const { return max_label_; }
  double last_time() const { return last_time_; }

 private:
  uint32_t find_father(double below_label, double at_time) const;

  std::vector<VertexRecord> vertices_;
  std::map<double, uint32_t> alive_;         // label -> id, alive only
  std::map<double, uint32_t> all_by_label_;  // label -> id, everything
  std::set<double> dead_labels_;             // maintained iff track_dead_
  std::vector<double> root_times_;           // sorted
  uint64_t root_count_ = 0;
  double max_label_ = -std::numeric_limits<double>::infinity();
  double last_time_ = 0.0;
  bool track_dead_ = false;
};

// Sorts a whole sequence of (label, lives) items.
SortState sort_items(const std::vector<std::pair<double, uint32_t>>& items,
                     bool track_dead = false);

// Sorts atoms that are already ordered by strictly increasing time.
SortState sort_atoms(const std::vector<Atom>& atoms, bool track_dead = false);

// Lean counting kernel for large Monte Carlo runs: no tree, no history,
// just the alive map, the root count and (optionally) dead labels. The
// rich SortState doubles as its reference implementation in tests.
class RootCounter {
 public:
  explicit RootCounter(bool track_dead = false);
  bool insert(double label, uint32_t lives);  // true if a new root
  uint64_t root_count() const { return root_count_; }
  std::size_t size() const { return n_; }
  uint64_t leading_dead() const;

 private:
  std::map<double, uint32_t> alive_;
  std::set<double> dead_labels_;
  uint64_t root_count_ = 0;
  uint64_t n_ = 0;
  bool track_dead_ = false;
};

// Root count of the sort taken in time order; the input may be unsorted.
uint64_t root_count_of_atoms(std::vector<Atom> atoms);

// Length of the longest strictly decreasing subsequence, O(n log n).
// Equals the root count of the sort when every item has one life.
uint64_t longest_decreasing_subsequence(const std::vector<double>& labels);

// Exhaustive minimum number of heaps over every feasible parent assignment
// (parent arrived earlier, has a smaller label and a spare life). Intended
// for n <= 9; refuses n > 12.
uint64_t min_heaps_bruteforce(
    const std::vector<std::pair<double, uint32_t>>& items);

// Root counts R_m, m = 1..m_max, when item i0's lives are forced to m and
// everything else is fixed. Consecutive differences lie in {-1, 0} and
// once the difference is 0 it stays 0.
std::vector<uint64_t> life_sweep(const std::vector<double>& labels,
                                 const std::vector<uint32_t>& base_lives,
                                 std::size_t i0, uint32_t m_max);

// Forest serialization: {"n", "root_count", "vertices": [...]} with vertex
// fields id, label, initial_lives, remaining_lives, parent, arrival_index.
std::string forest_to_json(const SortState& state);

}  // namespace heapforest
