#pragma once

#include <cstdint>
#include <string_view>

namespace heapforest {

// splitmix64 step; also the basis of all seed/stream mixing.
uint64_t splitmix64(uint64_t& state);

// Mixes an experiment id and a replica index into a stream id.
// Rule (also recorded in every report): FNV-1a over the id bytes,
// then two splitmix64 rounds with the replica index folded in.
uint64_t hash64(std::string_view experiment_id, uint64_t replica);

// Deterministic xoshiro256** stream. Two streams constructed from the
// same (master_seed, stream_id) produce identical sequences; distinct
// stream ids give statistically independent sequences. No global state.
class RandomStream {
 public:
  RandomStream(uint64_t master_seed, uint64_t stream_id);

  uint64_t next_u64();

  // Uniform on [0, 1), 53-bit resolution.
  double next_double();
  double uniform(double lo, double hi);

  // Inversion samplers; exponential(rate) never evaluates log(0).
  double exponential(double rate);

  // Exact for any mean >= 0: counts unit-rate arrivals, O(mean).
  uint64_t poisson(double mean);

  // P(X = k) = alpha (1-alpha)^(k-1), k >= 1. alpha in (0, 1].
  uint32_t geometric(double alpha);

  uint64_t uniform_index(uint64_t n);  // uniform on {0, ..., n-1}

 private:
  uint64_t s_[4];
};

}  // namespace heapforest
