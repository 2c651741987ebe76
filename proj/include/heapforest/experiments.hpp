#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "heapforest/distributions.hpp"
#include "heapforest/manifest.hpp"

namespace heapforest {

struct CheckResult {
  std::string name;
  double observed = 0.0;
  double expected = 0.0;
  double tolerance = 0.0;  // |observed - expected| bound, or p-value floor
  bool pass = false;
};

// Self-describing Monte Carlo result: parameters, seed derivation, point
// estimate with its standard error and every acceptance check that ran.
// wall_seconds is informational and deliberately kept out of the canonical
// JSON so that repeated runs serialize byte-identically.
struct EstimateReport {
  std::string experiment;
  std::vector<std::pair<std::string, std::string>> parameters;
  uint64_t replicas = 0;
  uint64_t master_seed = 0;
  std::string stream_rule;
  std::vector<uint64_t> stream_sample;  // first replica stream ids
  double estimate = 0.0;
  double std_error = 0.0;
  std::vector<CheckResult> checks;
  bool pass = true;
  nlohmann::ordered_json details;
  double wall_seconds = 0.0;
};

std::string report_to_json(const EstimateReport& report);
std::string report_to_csv(const EstimateReport& report);

// Replica fan-out: body(r) must touch only its own slot of any shared
// buffer. With jobs > 1 the loop runs under OpenMP; results are identical
// to the serial order because reduction happens after the loop.
void parallel_replicas(uint64_t replicas, int jobs,
                       const std::function<void(uint64_t)>& body);

// Growth-rate estimator: mean root count against log n over a geometric
// grid of n values, slope by least squares, uncertainty by a bootstrap
// over replicas. The grid needs at least two distinct points.
struct SlopeParams {
  OffspringDistribution dist = OffspringDistribution::dirac(1);
  std::vector<uint64_t> n_grid;
  uint64_t replicas = 0;
  uint64_t bootstrap = 1000;
  double slope_min = 0.0, slope_max = 0.0;  // used when bounded = true
  bool bounded = false;
  double reference = 0.0, ref_rel_tol = 0.0;  // used when referenced = true
  bool referenced = false;
  double ci_gt = 0.0, ci_lt = 0.0;  // bootstrap CI must avoid these
  bool ci_bounded = false;
  double info_reference = 0.0;  // reported in details, never gated
  bool has_info_reference = false;
};
EstimateReport estimate_c_slope(const SlopeParams& p, uint64_t seed, int jobs);

// Increment estimator for the same constant: mean number of dead vertices
// below the lowest alive one after n arrivals, plus one. exact = true
// enumerates label orders and life assignments instead of sampling
// (finite-support distributions, small n only).
struct ViaDParams {
  OffspringDistribution dist = OffspringDistribution::dirac(1);
  uint64_t n = 0;
  uint64_t replicas = 0;
  bool exact = false;
  double reference = 0.0, ref_rel_tol = 0.0;
  bool referenced = false;
};
EstimateReport estimate_c_via_d(const ViaDParams& p, uint64_t seed, int jobs);
double exact_mean_leading_dead_plus_one(const OffspringDistribution& dist,
                                        uint64_t n);

// Distributional checks of the stationary regimes at each time in t_list:
// particle counts (mean, variance/mean dispersion within [0.9, 1.1],
// Poisson fit, spatial uniformity, bin
// independence), remaining lives (geometric fit), nearest-neighbour gaps
// (first two moments against a Poisson sample drawn on the same box, since
// box-internal gaps do not follow the whole-line exponential law) and the
// dual root process (window count mean and Poisson fit). Chi-square checks
// run at a Bonferroni-corrected level.
struct StationarityParams {
  double lambda = 1.0;
  double alpha = 0.5;
  std::vector<double> t_list;
  uint64_t replicas = 0;
  double level = 0.01;
  double eps_trunc = 0.0;  // required when lambda = 0
};
EstimateReport stationarity_suite(const StationarityParams& p, uint64_t seed,
                                  int jobs);

// Trace stability on a fixed box as the atom field grows to the right:
// every replica reuses one realization restricted to increasing label
// cutoffs b. Reports the fraction of replicas whose clipped trace is
// identical for the last two cutoffs, plus boundary crossing statistics
// (geometric lives only).
struct HalfplaneParams {
  OffspringDistribution dist = OffspringDistribution::dirac(1);
  double box_x0 = 0.0, box_x1 = 1.0, box_s = 0.0, box_t = 1.0;
  std::vector<double> b_grid;
  double big_a = 0.0;
  uint64_t replicas = 0;
  double fixation_min = 0.0;
  bool fixation_bounded = false;
  bool boundary_stats = false;
  double alpha = 0.0;          // required when boundary_stats = true
  double stat_rel_tol = 0.05;  // relative tolerance of the crossing means
};
EstimateReport halfplane_fixation(const HalfplaneParams& p, uint64_t seed,
                                  int jobs);

// Life-redistribution comparison: with labels fixed, lives drawn from a
// two-point distribution on consecutive integers never produce more roots
// on average than any same-mean distribution they were condensed from.
struct CouplingParams {
  OffspringDistribution mu = OffspringDistribution::dirac(1);
  OffspringDistribution mu_prime = OffspringDistribution::dirac(1);
  uint64_t n_sequences = 0;
  uint64_t n_max = 8;
  bool exact = true;
  uint64_t mc_replicas = 0;  // per sequence, when exact = false
};
EstimateReport coupling_inequality_check(const CouplingParams& p,
                                         uint64_t seed, int jobs);
// Exact conditional mean root count, lives integrated out (finite support).
double exact_mean_roots(const std::vector<double>& labels,
                        const OffspringDistribution& dist);

// P(single tree after n arrivals) with a Wilson interval; the 1/n bound
// must never be refuted, and may optionally be asserted outright.
struct HeapableParams {
  OffspringDistribution dist = OffspringDistribution::dirac(1);
  uint64_t n = 0;
  uint64_t replicas = 0;
  bool assert_upper = false;
};
EstimateReport heapable_probability(const HeapableParams& p, uint64_t seed,
                                    int jobs);

// Manifest front end: dispatches on experiment=, validates the key set and
// fills the common report fields. seed_override/jobs_override < 0 keep the
// manifest (or default) values.
struct RunOverrides {
  bool has_seed = false;
  uint64_t seed = 0;
  int jobs = 0;  // 0: manifest value or serial
};
EstimateReport run_experiment(const Manifest& manifest,
                              const RunOverrides& overrides);

}  // namespace heapforest
