#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "heapforest/random.hpp"

namespace heapforest {

// A point of the marked Poisson process: position, arrival time, lives.
struct Atom {
  double label = 0.0;
  double time = 0.0;
  uint32_t lives = 1;
};

// Offspring (lives) distribution on {1, 2, ...}. Mass at 0 is rejected:
// a particle born dead never interacts and breaks the sort invariants.
class OffspringDistribution {
 public:
  static OffspringDistribution dirac(uint32_t k);
  static OffspringDistribution geometric(double alpha);
  // Entries (value, probability); probabilities must sum to 1 within 1e-12.
  static OffspringDistribution table(std::vector<std::pair<uint32_t, double>> entries);

  // Grammar: "dirac:K" | "geom:ALPHA" | "table:V1=P1,V2=P2,...".
  // Sums within 1e-9 of 1 are accepted and renormalized.
  static OffspringDistribution parse(const std::string& text);

  uint32_t sample(RandomStream& rng) const;
  double mean() const;
  std::string describe() const;

  enum class Kind { Dirac, Geometric, Table };
  Kind kind() const { return kind_; }
  uint32_t dirac_value() const { return dirac_k_; }
  double geometric_alpha() const { return alpha_; }
  const std::vector<std::pair<uint32_t, double>>& table_entries() const {
    return entries_;
  }

 private:
  Kind kind_ = Kind::Dirac;
  uint32_t dirac_k_ = 1;
  double alpha_ = 0.5;
  std::vector<std::pair<uint32_t, double>> entries_;  // sorted by value
  std::vector<double> cdf_;
};

// Marked Poisson process of unit intensity on [x_lo, x_hi] x [0, t_max],
// lives drawn i.i.d. from dist. Result sorted by time. Degenerate-equal
// bounds give an empty list; inverted bounds are an error.
std::vector<Atom> sample_marked_ppp(double x_lo, double x_hi, double t_max,
                                    const OffspringDistribution& dist,
                                    RandomStream& rng);

// Sink times on (0, t_max] with intensity 1 / (lambda + (1-alpha) s).
// alpha = 1 degenerates to a homogeneous process of rate 1/lambda.
// lambda = 0 needs eps_trunc > 0; times below eps_trunc are excluded
// (the intensity is not integrable at 0).
std::vector<double> sample_sink_process(double lambda, double alpha,
                                        double t_max, RandomStream& rng,
                                        double eps_trunc = 0.0);

}  // namespace heapforest
