#include "heapforest/random.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace heapforest {

uint64_t splitmix64(uint64_t& state) {
  uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

uint64_t hash64(std::string_view experiment_id, uint64_t replica) {
  uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (unsigned char c : experiment_id) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  uint64_t state = h ^ (replica + 0x9e3779b97f4a7c15ULL);
  splitmix64(state);
  return splitmix64(state);
}

RandomStream::RandomStream(uint64_t master_seed, uint64_t stream_id) {
  uint64_t state = master_seed ^ (stream_id * 0xda942042e4dd58b5ULL);
  for (auto& s : s_) s = splitmix64(state);
  // xoshiro must not start from the all-zero state.
  if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[0] = 1;
}

static inline uint64_t rotl(uint64_t x, int k) {
  return (x << k) | (x >> (64 - k));
}

uint64_t RandomStream::next_u64() {
  const uint64_t result = rotl(s_[1] * 5, 7) * 9;
  const uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

double RandomStream::next_double() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RandomStream::uniform(double lo, double hi) {
  return lo + (hi - lo) * next_double();
}

double RandomStream::exponential(double rate) {
  if (!(rate > 0)) throw std::invalid_argument("exponential: rate must be > 0");
  // 1 - U lies in (0, 1], so the log argument is never zero.
  return -std::log1p(-next_double()) / rate;
}

uint64_t RandomStream::poisson(double mean) {
  if (mean < 0) throw std::invalid_argument("poisson: negative mean");
  if (mean == 0) return 0;
  uint64_t count = 0;
  double acc = exponential(1.0);
  while (acc <= mean) {
    ++count;
    acc += exponential(1.0);
  }
  return count;
}

uint32_t RandomStream::geometric(double alpha) {
  if (!(alpha > 0) || alpha > 1)
    throw std::invalid_argument("geometric: alpha must be in (0, 1]");
  if (alpha == 1.0) return 1;
  const double u = 1.0 - next_double();  // (0, 1]
  const double v = std::floor(std::log(u) / std::log1p(-alpha));
  if (v >= static_cast<double>(std::numeric_limits<uint32_t>::max() - 1))
    return std::numeric_limits<uint32_t>::max() - 1;
  return static_cast<uint32_t>(v) + 1;
}

uint64_t RandomStream::uniform_index(uint64_t n) {
  if (n == 0) throw std::invalid_argument("uniform_index: n must be > 0");
  // Rejection to kill modulo bias.
  const uint64_t limit = std::numeric_limits<uint64_t>::max() - (std::numeric_limits<uint64_t>::max() % n);
  uint64_t x;
  do {
    x = next_u64();
  } while (x >= limit);
  return x % n;
}

}  // namespace heapforest
