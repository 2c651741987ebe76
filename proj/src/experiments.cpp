#include "heapforest/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <numeric>
#include <stdexcept>
#include <thread>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "heapforest/geometric.hpp"
#include "heapforest/hammersley.hpp"
#include "heapforest/heap_sort.hpp"
#include "heapforest/random.hpp"
#include "heapforest/root_process.hpp"
#include "heapforest/stats.hpp"

namespace heapforest {

namespace {

constexpr const char* kStreamRule =
    "stream_id = hash64(experiment, replica): FNV-1a over the experiment id, "
    "then two splitmix64 rounds with the replica index folded in";

// 99.9% two-sided normal quantile, used for correlation null checks.
constexpr double kZCorr = 3.2905267314918945;
// 99% two-sided normal quantile, used for Wilson intervals.
constexpr double kZ99 = 2.5758293035489004;

CheckResult check_abs(std::string name, double observed, double expected,
                      double tolerance) {
  CheckResult c;
  c.name = std::move(name);
  c.observed = observed;
  c.expected = expected;
  c.tolerance = tolerance;
  c.pass = std::fabs(observed - expected) <= tolerance;
  return c;
}

CheckResult check_le(std::string name, double observed, double bound,
                     double slack = 0.0) {
  CheckResult c;
  c.name = std::move(name);
  c.observed = observed;
  c.expected = bound;
  c.tolerance = slack;
  c.pass = observed <= bound + slack;
  return c;
}

CheckResult check_ge(std::string name, double observed, double bound) {
  CheckResult c;
  c.name = std::move(name);
  c.observed = observed;
  c.expected = bound;
  c.tolerance = 0.0;
  c.pass = observed >= bound;
  return c;
}

CheckResult check_pvalue(std::string name, double p, double floor_level) {
  CheckResult c;
  c.name = std::move(name);
  c.observed = p;
  c.expected = floor_level;
  c.tolerance = floor_level;
  c.pass = p >= floor_level;
  return c;
}

void start_report(EstimateReport& rep, const std::string& experiment,
                  uint64_t replicas, uint64_t seed) {
  rep.experiment = experiment;
  rep.replicas = replicas;
  rep.master_seed = seed;
  rep.stream_rule = kStreamRule;
  rep.stream_sample.clear();
  for (uint64_t r = 0; r < std::min<uint64_t>(replicas, 8); ++r)
    rep.stream_sample.push_back(hash64(experiment, r));
}

void finish_report(EstimateReport& rep) {
  rep.pass = true;
  for (const CheckResult& c : rep.checks) rep.pass = rep.pass && c.pass;
}

void add_param(EstimateReport& rep, const std::string& k,
               const std::string& v) {
  rep.parameters.emplace_back(k, v);
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

MeanVar mean_var_u64(const std::vector<uint64_t>& xs) {
  std::vector<double> d(xs.begin(), xs.end());
  return mean_var(d);
}

}  // namespace

void parallel_replicas(uint64_t replicas, int jobs,
                       const std::function<void(uint64_t)>& body) {
  if (jobs <= 0) {
    const unsigned hw = std::thread::hardware_concurrency();
    jobs = hw > 0 ? static_cast<int>(hw) : 1;
  }
  std::mutex err_mutex;
  std::string first_error;
  bool failed = false;
  const auto guarded = [&](uint64_t r) {
    try {
      body(r);
    } catch (const std::exception& e) {
      std::lock_guard<std::mutex> lock(err_mutex);
      if (!failed) {
        failed = true;
        first_error = e.what();
      }
    }
  };
#ifdef _OPENMP
  if (jobs > 1) {
#pragma omp parallel for num_threads(jobs) schedule(dynamic)
    for (long long r = 0; r < static_cast<long long>(replicas); ++r)
      guarded(static_cast<uint64_t>(r));
  } else
#endif
  {
    for (uint64_t r = 0; r < replicas; ++r) guarded(r);
  }
  if (failed) throw std::runtime_error("replica failed: " + first_error);
}

std::string report_to_json(const EstimateReport& rep) {
  nlohmann::ordered_json j;
  j["schema"] = "report-1";
  j["experiment"] = rep.experiment;
  auto& params = j["parameters"] = nlohmann::ordered_json::object();
  for (const auto& [k, v] : rep.parameters) params[k] = v;
  j["replicas"] = rep.replicas;
  j["seed"] = {{"master", rep.master_seed},
               {"stream_rule", rep.stream_rule},
               {"streams", rep.stream_sample}};
  j["estimate"] = rep.estimate;
  j["std_error"] = rep.std_error;
  auto& checks = j["checks"] = nlohmann::ordered_json::array();
  for (const CheckResult& c : rep.checks)
    checks.push_back({{"name", c.name},
                      {"observed", c.observed},
                      {"expected", c.expected},
                      {"tolerance", c.tolerance},
                      {"pass", c.pass}});
  j["pass"] = rep.pass;
  j["details"] = rep.details;
  return j.dump(2) + "\n";
}

std::string report_to_csv(const EstimateReport& rep) {
  std::string out = "key,observed,expected,tolerance,pass\n";
  out += "experiment," + rep.experiment + ",,,\n";
  out += "estimate," + fmt(rep.estimate) + ",,,\n";
  out += "std_error," + fmt(rep.std_error) + ",,,\n";
  for (const CheckResult& c : rep.checks)
    out += c.name + "," + fmt(c.observed) + "," + fmt(c.expected) + "," +
           fmt(c.tolerance) + "," + (c.pass ? "1" : "0") + "\n";
  out += std::string("pass,") + (rep.pass ? "1" : "0") + ",,,\n";
  return out;
}

EstimateReport estimate_c_slope(const SlopeParams& p, uint64_t seed,
                                int jobs) {
  const auto t0 = std::chrono::steady_clock::now();
  if (p.n_grid.size() < 2)
    throw std::invalid_argument("estimate_c_slope: grid needs >= 2 points");
  for (std::size_t i = 0; i < p.n_grid.size(); ++i) {
    if (p.n_grid[i] < 2)
      throw std::invalid_argument("estimate_c_slope: grid points must be >= 2");
    if (i > 0 && p.n_grid[i] <= p.n_grid[i - 1])
      throw std::invalid_argument("estimate_c_slope: grid must be ascending");
  }
  if (p.replicas < 2)
    throw std::invalid_argument("estimate_c_slope: needs >= 2 replicas");

  const std::size_t g = p.n_grid.size();
  std::vector<std::vector<uint64_t>> roots(p.replicas,
                                           std::vector<uint64_t>(g, 0));
  parallel_replicas(p.replicas, jobs, [&](uint64_t r) {
    RandomStream rng(seed, hash64("estimate_c_slope", r));
    RootCounter counter;
    std::size_t gi = 0;
    for (uint64_t n = 1; n <= p.n_grid.back(); ++n) {
      const double label = rng.next_double();
      counter.insert(label, p.dist.sample(rng));
      if (n == p.n_grid[gi]) roots[r][gi++] = counter.root_count();
    }
  });

  std::vector<double> xs(g), means(g, 0.0);
  for (std::size_t i = 0; i < g; ++i) {
    xs[i] = std::log(static_cast<double>(p.n_grid[i]));
    for (uint64_t r = 0; r < p.replicas; ++r)
      means[i] += static_cast<double>(roots[r][i]);
    means[i] /= static_cast<double>(p.replicas);
  }
  const double slope = ols_slope(xs, means);

  // Percentile bootstrap over replicas.
  const uint64_t B = std::max<uint64_t>(p.bootstrap, 10);
  RandomStream boot(seed, hash64("estimate_c_slope/bootstrap", 0));
  std::vector<double> slopes(B);
  std::vector<double> bmeans(g);
  for (uint64_t b = 0; b < B; ++b) {
    std::fill(bmeans.begin(), bmeans.end(), 0.0);
    for (uint64_t k = 0; k < p.replicas; ++k) {
      const uint64_t r = boot.uniform_index(p.replicas);
      for (std::size_t i = 0; i < g; ++i)
        bmeans[i] += static_cast<double>(roots[r][i]);
    }
    for (std::size_t i = 0; i < g; ++i)
      bmeans[i] /= static_cast<double>(p.replicas);
    slopes[b] = ols_slope(xs, bmeans);
  }
  std::sort(slopes.begin(), slopes.end());
  const double ci_lo = slopes[static_cast<std::size_t>(0.025 * (B - 1))];
  const double ci_hi = slopes[static_cast<std::size_t>(
      std::ceil(0.975 * (B - 1)))];
  const double se = mean_var(slopes).std_error() *
                    std::sqrt(static_cast<double>(B));  // sd of bootstrap

  EstimateReport rep;
  start_report(rep, "estimate_c_slope", p.replicas, seed);
  add_param(rep, "dist", p.dist.describe());
  {
    std::string gstr;
    for (std::size_t i = 0; i < g; ++i)
      gstr += (i ? "," : "") + std::to_string(p.n_grid[i]);
    add_param(rep, "n_grid", gstr);
  }
  rep.estimate = slope;
  rep.std_error = se;
  if (p.bounded) {
    rep.checks.push_back(check_abs("slope_within_bounds", slope,
                                   0.5 * (p.slope_min + p.slope_max),
                                   0.5 * (p.slope_max - p.slope_min)));
  }
  if (p.referenced)
    rep.checks.push_back(check_abs("slope_matches_reference", slope,
                                   p.reference,
                                   p.ref_rel_tol * std::fabs(p.reference)));
  if (p.ci_bounded) {
    rep.checks.push_back(check_ge("ci95_above", ci_lo, p.ci_gt));
    rep.checks.push_back(check_le("ci95_below", ci_hi, p.ci_lt));
  }
  rep.details["n_grid"] = p.n_grid;
  rep.details["mean_roots"] = means;
  rep.details["ci95"] = {ci_lo, ci_hi};
  rep.details["bootstrap_resamples"] = B;
  if (p.has_info_reference) {
    rep.details["info_reference"] = p.info_reference;
    rep.details["info_reference_gap"] = slope - p.info_reference;
  }
  finish_report(rep);
  rep.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return rep;
}

double exact_mean_leading_dead_plus_one(const OffspringDistribution& dist,
                                        uint64_t n) {
  if (dist.kind() == OffspringDistribution::Kind::Geometric)
    throw std::invalid_argument("exact enumeration needs finite support");
  std::vector<std::pair<uint32_t, double>> support;
  if (dist.kind() == OffspringDistribution::Kind::Dirac) {
    support.emplace_back(dist.dirac_value(), 1.0);
  } else {
    for (const auto& [v, p] : dist.table_entries()) support.emplace_back(v, p);
  }
  const std::size_t k = support.size();
  double perms = 1.0, assigns = 1.0;
  for (uint64_t i = 2; i <= n; ++i) perms *= static_cast<double>(i);
  for (uint64_t i = 0; i < n; ++i) assigns *= static_cast<double>(k);
  if (n < 1 || n > 8 || perms * assigns > 2e6)
    throw std::invalid_argument("exact enumeration too large");

  std::vector<uint32_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::vector<std::size_t> pick(n, 0);
  double total = 0.0;
  do {
    // Odometer over life assignments; probability is the product of the
    // chosen masses times 1/n! for the label order.
    std::fill(pick.begin(), pick.end(), 0);
    while (true) {
      double prob = 1.0;
      RootCounter counter(true);
      for (uint64_t i = 0; i < n; ++i) {
        prob *= support[pick[i]].second;
        counter.insert(static_cast<double>(order[i]) + 1.0,
                       support[pick[i]].first);
      }
      total += prob * static_cast<double>(counter.leading_dead());
      std::size_t d = 0;
      while (d < n && ++pick[d] == k) pick[d++] = 0;
      if (d == n) break;
    }
  } while (std::next_permutation(order.begin(), order.end()));
  return total / perms + 1.0;
}

EstimateReport estimate_c_via_d(const ViaDParams& p, uint64_t seed, int jobs) {
  const auto t0 = std::chrono::steady_clock::now();
  if (p.n < 2) throw std::invalid_argument("estimate_c_via_d: n must be >= 2");

  EstimateReport rep;
  if (p.exact) {
    start_report(rep, "estimate_c_via_d", 0, seed);
    rep.estimate = exact_mean_leading_dead_plus_one(p.dist, p.n);
    rep.std_error = 0.0;
    rep.details["exact"] = true;
    if (p.referenced)
      rep.checks.push_back(check_abs("exact_matches_reference", rep.estimate,
                                     p.reference, 1e-12));
  } else {
    if (p.replicas < 2)
      throw std::invalid_argument("estimate_c_via_d: needs >= 2 replicas");
    std::vector<uint64_t> grid{p.n / 8, p.n / 4, p.n / 2, p.n};
    grid.erase(std::remove_if(grid.begin(), grid.end(),
                              [](uint64_t v) { return v < 2; }),
               grid.end());
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    const std::size_t g = grid.size();
    std::vector<std::vector<uint64_t>> deads(p.replicas,
                                             std::vector<uint64_t>(g, 0));
    parallel_replicas(p.replicas, jobs, [&](uint64_t r) {
      RandomStream rng(seed, hash64("estimate_c_via_d", r));
      RootCounter counter(true);
      std::size_t gi = 0;
      for (uint64_t n = 1; n <= grid.back(); ++n) {
        const double label = rng.next_double();
        counter.insert(label, p.dist.sample(rng));
        if (n == grid[gi]) deads[r][gi++] = counter.leading_dead();
      }
    });
    start_report(rep, "estimate_c_via_d", p.replicas, seed);
    std::vector<double> gmeans(g), gses(g);
    for (std::size_t i = 0; i < g; ++i) {
      std::vector<double> col(p.replicas);
      for (uint64_t r = 0; r < p.replicas; ++r)
        col[r] = static_cast<double>(deads[r][i]);
      const MeanVar mv = mean_var(col);
      gmeans[i] = mv.mean + 1.0;
      gses[i] = mv.std_error();
    }
    rep.estimate = gmeans.back();
    rep.std_error = gses.back();
    rep.details["grid"] = grid;
    rep.details["mean_d_plus_one"] = gmeans;
    rep.details["std_errors"] = gses;
    double worst = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < g; ++i) {
      const double allowance =
          3.0 * std::sqrt(gses[i] * gses[i] + gses[i - 1] * gses[i - 1]);
      worst = std::min(worst, gmeans[i] - gmeans[i - 1] + allowance);
    }
    if (g > 1)
      rep.checks.push_back(
          check_ge("increment_nondecreasing_margin", worst, 0.0));
    if (p.referenced)
      rep.checks.push_back(check_abs(
          "matches_reference", rep.estimate, p.reference,
          p.ref_rel_tol * std::fabs(p.reference)));
  }
  add_param(rep, "dist", p.dist.describe());
  add_param(rep, "n", std::to_string(p.n));
  finish_report(rep);
  rep.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return rep;
}

EstimateReport stationarity_suite(const StationarityParams& p, uint64_t seed,
                                  int jobs) {
  const auto t0 = std::chrono::steady_clock::now();
  if (p.t_list.empty())
    throw std::invalid_argument("stationarity_suite: empty t_list");
  for (std::size_t i = 0; i < p.t_list.size(); ++i) {
    if (!(p.t_list[i] > 0.0))
      throw std::invalid_argument("stationarity_suite: t must be > 0");
    if (i > 0 && !(p.t_list[i] > p.t_list[i - 1]))
      throw std::invalid_argument("stationarity_suite: t_list not ascending");
  }
  if (p.replicas < 2)
    throw std::invalid_argument("stationarity_suite: needs >= 2 replicas");
  if (!(p.alpha > 0.0 && p.alpha <= 1.0))
    throw std::invalid_argument("stationarity_suite: alpha outside (0, 1]");
  if (!(p.lambda >= 0.0))
    throw std::invalid_argument("stationarity_suite: lambda < 0");
  if (p.lambda == 0.0 && !(p.eps_trunc > 0.0))
    throw std::invalid_argument(
        "stationarity_suite: lambda = 0 needs eps_trunc > 0");
  if (!(p.level > 0.0 && p.level <= 0.5))
    throw std::invalid_argument("stationarity_suite: level outside (0, 0.5]");

  const std::size_t T = p.t_list.size();
  const std::size_t kBins = 5;
  const bool root_side = p.lambda > 0.0;
  const OffspringDistribution lives_dist =
      p.alpha < 1.0 ? OffspringDistribution::geometric(p.alpha)
                    : OffspringDistribution::dirac(1);

  struct Row {
    uint64_t count = 0;
    uint32_t bins[5] = {0, 0, 0, 0, 0};
    uint32_t life = 0;  // 0: no particle alive
    double gap_sum = 0.0, gap_sq = 0.0, gap_q4 = 0.0;
    uint64_t gap_n = 0;
    // Matched reference: gaps of a Poisson(rho) sample drawn on the same box.
    double ref_sum = 0.0, ref_sq = 0.0, ref_q4 = 0.0;
    uint64_t ref_n = 0;
    uint64_t root_window = 0;
  };
  std::vector<std::vector<Row>> rows(T,
                                     std::vector<Row>(p.replicas));

  parallel_replicas(p.replicas, jobs, [&](uint64_t r) {
    RandomStream rng(seed, hash64("stationarity_suite", r));
    for (std::size_t j = 0; j < T; ++j) {
      const double t = p.t_list[j];
      Row& row = rows[j][r];
      const SourcesSinks boundary = stationary_boundary(
          0.0, 1.0, p.lambda, p.alpha, t, rng, p.eps_trunc);
      const GraphicalRecord rec =
          simulate(0.0, 1.0, t, lives_dist, boundary, rng);
      const std::vector<ParticleState> config = rec.configuration_at(t);
      row.count = config.size();
      for (const ParticleState& ps : config) {
        const std::size_t b = std::min<std::size_t>(
            kBins - 1, static_cast<std::size_t>(ps.label * kBins));
        ++row.bins[b];
      }
      if (!config.empty())
        row.life =
            config[rng.uniform_index(config.size())].remaining;
      for (std::size_t i = 1; i < config.size(); ++i) {
        const double gap = config[i].label - config[i - 1].label;
        row.gap_sum += gap;
        row.gap_sq += gap * gap;
        row.gap_q4 += gap * gap * gap * gap;
        ++row.gap_n;
      }
      if (root_side) {
        std::vector<double> init_heights =
            sample_sink_process(p.lambda, p.alpha, t, rng);
        while (!init_heights.empty() && init_heights.back() >= t)
          init_heights.pop_back();
        RootConfiguration init;
        for (double h : init_heights) init.insert(h);
        const uint64_t n_src = rng.poisson(p.lambda * 2.0);
        std::vector<double> src_pos(n_src);
        for (double& v : src_pos) v = rng.uniform(-2.0, 0.0);
        std::sort(src_pos.begin(), src_pos.end(),
                  std::greater<double>());
        std::vector<std::pair<double, uint32_t>> sources;
        sources.reserve(n_src);
        for (double v : src_pos)
          sources.emplace_back(v, rng.geometric(p.alpha));
        std::vector<Atom> atoms =
            sample_marked_ppp(-2.0, 0.0, t, lives_dist, rng);
        std::sort(atoms.begin(), atoms.end(),
                  [](const Atom& a, const Atom& b) {
                    return a.label > b.label;
                  });
        const RootEvolution ev = evolve(init, sources, atoms, 2.0, t);
        const auto& hs = ev.final_config.set();
        row.root_window = static_cast<uint64_t>(
            std::distance(hs.lower_bound(0.25 * t), hs.lower_bound(0.75 * t)));
      }
      {
        // Box-internal gaps are biased away from the Exp(rho) line law, so
        // compare them against gaps of a Poisson sample on the same box.
        const uint64_t m = rng.poisson(p.lambda + (1.0 - p.alpha) * t);
        std::vector<double> pos(m);
        for (double& v : pos) v = rng.uniform(0.0, 1.0);
        std::sort(pos.begin(), pos.end());
        for (std::size_t i = 1; i < pos.size(); ++i) {
          const double g = pos[i] - pos[i - 1];
          row.ref_sum += g;
          row.ref_sq += g * g;
          row.ref_q4 += g * g * g * g;
          ++row.ref_n;
        }
      }
    }
  });

  EstimateReport rep;
  start_report(rep, "stationarity_suite", p.replicas, seed);
  add_param(rep, "lambda", fmt(p.lambda));
  add_param(rep, "alpha", fmt(p.alpha));
  {
    std::string ts;
    for (std::size_t j = 0; j < T; ++j) ts += (j ? "," : "") + fmt(p.t_list[j]);
    add_param(rep, "t_list", ts);
  }

  // Two passes: chi-square checks share a Bonferroni budget.
  struct PendingChi2 {
    std::string name;
    double p_value;
  };
  std::vector<PendingChi2> chi2s;
  std::vector<CheckResult> mean_checks;
  const double beta = 1.0 - p.alpha;

  for (std::size_t j = 0; j < T; ++j) {
    const double t = p.t_list[j];
    const std::string tag = "t" + fmt(t);
    const double rho = p.lambda + beta * t;
    std::vector<uint64_t> counts(p.replicas);
    std::vector<double> bin_tot(kBins, 0.0);
    std::vector<double> bin0(p.replicas), bin4(p.replicas);
    std::vector<uint32_t> lives;
    double gs = 0.0, gq = 0.0, g4 = 0.0;
    double rs = 0.0, rq = 0.0, r4 = 0.0;
    uint64_t gn = 0, rn = 0;
    for (uint64_t r = 0; r < p.replicas; ++r) {
      const Row& row = rows[j][r];
      counts[r] = row.count;
      for (std::size_t b = 0; b < kBins; ++b) bin_tot[b] += row.bins[b];
      bin0[r] = row.bins[0];
      bin4[r] = row.bins[kBins - 1];
      if (row.count > 0) lives.push_back(row.life);
      gs += row.gap_sum;
      gq += row.gap_sq;
      g4 += row.gap_q4;
      gn += row.gap_n;
      rs += row.ref_sum;
      rq += row.ref_sq;
      r4 += row.ref_q4;
      rn += row.ref_n;
    }
    const MeanVar cm = mean_var_u64(counts);
    mean_checks.push_back(
        check_abs("count_mean_" + tag, cm.mean, rho, 3.0 * cm.std_error()));
    if (cm.mean > 0.0)
      mean_checks.push_back(check_abs("count_dispersion_" + tag,
                                      cm.variance / cm.mean, 1.0, 0.1));
    chi2s.push_back({"count_poisson_" + tag,
                     chi2_poisson_fit(counts, rho).p_value});
    {
      std::vector<double> expected(kBins,
                                   std::accumulate(bin_tot.begin(),
                                                   bin_tot.end(), 0.0) /
                                       kBins);
      chi2s.push_back({"bins_uniform_" + tag,
                       chi2_goodness(bin_tot, expected).p_value});
      const double corr = pearson_correlation(bin0, bin4);
      mean_checks.push_back(check_abs(
          "bins_uncorrelated_" + tag, corr, 0.0,
          kZCorr / std::sqrt(static_cast<double>(p.replicas))));
    }
    if (p.alpha < 1.0) {
      chi2s.push_back({"lives_geometric_" + tag,
                       chi2_geometric_fit(lives, p.alpha).p_value});
    } else {
      uint64_t bad = 0;
      for (uint32_t v : lives) bad += v != 1;
      mean_checks.push_back(
          check_abs("lives_unit_" + tag, static_cast<double>(bad), 0.0, 0.0));
    }
    if (gn > 1 && rn > 1) {
      const double dgn = static_cast<double>(gn);
      const double drn = static_cast<double>(rn);
      const double gmean = gs / dgn, gm2 = gq / dgn, gm4 = g4 / dgn;
      const double rmean = rs / drn, rm2 = rq / drn, rm4 = r4 / drn;
      const double se_mean =
          std::sqrt(std::max(0.0, gm2 - gmean * gmean) / dgn +
                    std::max(0.0, rm2 - rmean * rmean) / drn);
      const double se_m2 = std::sqrt(std::max(0.0, gm4 - gm2 * gm2) / dgn +
                                     std::max(0.0, rm4 - rm2 * rm2) / drn);
      mean_checks.push_back(
          check_abs("gap_mean_vs_poisson_" + tag, gmean, rmean, 3.0 * se_mean));
      mean_checks.push_back(
          check_abs("gap_m2_vs_poisson_" + tag, gm2, rm2, 3.0 * se_m2));
    }
    if (root_side) {
      std::vector<uint64_t> rc(p.replicas);
      for (uint64_t r = 0; r < p.replicas; ++r) rc[r] = rows[j][r].root_window;
      const double a = 0.25 * t, b = 0.75 * t;
      const double expected =
          beta > 0.0
              ? std::log((p.lambda + beta * b) / (p.lambda + beta * a)) / beta
              : (b - a) / p.lambda;
      const MeanVar rm = mean_var_u64(rc);
      mean_checks.push_back(check_abs("root_count_mean_" + tag, rm.mean,
                                      expected, 3.0 * rm.std_error()));
      if (rm.mean > 0.0)
        mean_checks.push_back(check_abs("root_count_dispersion_" + tag,
                                        rm.variance / rm.mean, 1.0, 0.1));
      chi2s.push_back({"root_count_poisson_" + tag,
                       chi2_poisson_fit(rc, expected).p_value});
    }
  }

  const double floor_level =
      p.level / static_cast<double>(std::max<std::size_t>(chi2s.size(), 1));
  rep.checks = std::move(mean_checks);
  for (const PendingChi2& c : chi2s)
    rep.checks.push_back(check_pvalue(c.name, c.p_value, floor_level));

  {
    std::vector<uint64_t> last_counts(p.replicas);
    for (uint64_t r = 0; r < p.replicas; ++r)
      last_counts[r] = rows[T - 1][r].count;
    const MeanVar mv = mean_var_u64(last_counts);
    rep.estimate = mv.mean;
    rep.std_error = mv.std_error();
  }
  rep.details["chi2_level_each"] = floor_level;
  rep.details["chi2_tests"] = chi2s.size();
  finish_report(rep);
  rep.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return rep;
}

EstimateReport halfplane_fixation(const HalfplaneParams& p, uint64_t seed,
                                  int jobs) {
  const auto t0 = std::chrono::steady_clock::now();
  if (p.b_grid.size() < 2)
    throw std::invalid_argument("halfplane_fixation: b_grid needs >= 2 values");
  for (std::size_t i = 1; i < p.b_grid.size(); ++i)
    if (!(p.b_grid[i] > p.b_grid[i - 1]))
      throw std::invalid_argument("halfplane_fixation: b_grid not ascending");
  if (!(p.box_x0 < p.box_x1) || !(p.box_s < p.box_t))
    throw std::invalid_argument("halfplane_fixation: degenerate box");
  if (!(p.big_a <= p.box_x0) || !(p.box_x1 <= p.b_grid.front()))
    throw std::invalid_argument(
        "halfplane_fixation: box outside the simulated region");
  if (p.replicas < 1)
    throw std::invalid_argument("halfplane_fixation: needs >= 1 replica");
  if (p.boundary_stats && !(p.alpha > 0.0 && p.alpha < 1.0))
    throw std::invalid_argument(
        "halfplane_fixation: boundary stats need alpha in (0, 1)");
  if (p.boundary_stats && !(p.box_s > 0.0))
    throw std::invalid_argument(
        "halfplane_fixation: boundary stats need box_s > 0");

  struct Tuple3 {
    double a, b, c;
    bool operator==(const Tuple3& o) const {
      return a == o.a && b == o.b && c == o.c;
    }
    bool operator<(const Tuple3& o) const {
      if (a != o.a) return a < o.a;
      if (b != o.b) return b < o.b;
      return c < o.c;
    }
  };

  const std::size_t G = p.b_grid.size();
  std::vector<uint8_t> fixed(p.replicas, 0);
  std::vector<uint32_t> stable_from(p.replicas, 0);
  std::vector<uint64_t> top(p.replicas, 0), side(p.replicas, 0),
      bottom(p.replicas, 0);

  parallel_replicas(p.replicas, jobs, [&](uint64_t r) {
    RandomStream rng(seed, hash64("halfplane_fixation", r));
    const std::vector<Atom> all = sample_marked_ppp(
        p.big_a, p.b_grid.back(), p.box_t, p.dist, rng);
    std::vector<std::vector<Tuple3>> traces(G);
    for (std::size_t gi = 0; gi < G; ++gi) {
      const double b = p.b_grid[gi];
      std::vector<Atom> atoms;
      atoms.reserve(all.size());
      for (const Atom& a : all)
        if (a.label <= b) atoms.push_back(a);
      const GraphicalRecord rec =
          simulate_atoms(p.big_a, b, p.box_t, atoms, SourcesSinks{});
      std::vector<Tuple3>& trace = traces[gi];
      for (const VerticalSegment& v : rec.vertical_segments)
        if (v.label >= p.box_x0 && v.label <= p.box_x1 &&
            v.t_birth <= p.box_t && v.t_end >= p.box_s)
          trace.push_back({v.label, std::max(v.t_birth, p.box_s),
                           std::min(v.t_end, p.box_t)});
      for (const HorizontalSegment& h : rec.horizontal_segments)
        if (h.time >= p.box_s && h.time <= p.box_t && h.x_from <= p.box_x1 &&
            h.x_to >= p.box_x0)
          trace.push_back({h.time, std::max(h.x_from, p.box_x0),
                           std::min(h.x_to, p.box_x1)});
      std::sort(trace.begin(), trace.end());
      if (gi + 1 == G) {
        for (const VerticalSegment& v : rec.vertical_segments) {
          if (v.label < p.box_x0 || v.label > p.box_x1) continue;
          if (!v.dies && v.t_birth <= p.box_t) ++top[r];
          if (v.t_birth <= p.box_s && v.t_end > p.box_s) ++bottom[r];
        }
        for (const HorizontalSegment& h : rec.horizontal_segments)
          if (h.time >= p.box_s && h.time <= p.box_t && h.x_from <= p.box_x1 &&
              h.x_to > p.box_x1)
            ++side[r];
      }
    }
    fixed[r] = traces[G - 1] == traces[G - 2] ? 1 : 0;
    uint32_t st = 0;
    for (std::size_t gi = G - 1; gi > 0; --gi) {
      if (!(traces[gi] == traces[gi - 1])) {
        st = static_cast<uint32_t>(gi);
        break;
      }
    }
    stable_from[r] = st;
  });

  EstimateReport rep;
  start_report(rep, "halfplane_fixation", p.replicas, seed);
  add_param(rep, "dist", p.dist.describe());
  add_param(rep, "box", fmt(p.box_x0) + "," + fmt(p.box_x1) + "," +
                            fmt(p.box_s) + "," + fmt(p.box_t));
  {
    std::string bs;
    for (std::size_t i = 0; i < G; ++i) bs += (i ? "," : "") + fmt(p.b_grid[i]);
    add_param(rep, "b_grid", bs);
  }
  add_param(rep, "big_a", fmt(p.big_a));

  uint64_t nfixed = 0;
  for (uint8_t f : fixed) nfixed += f;
  const double frac =
      static_cast<double>(nfixed) / static_cast<double>(p.replicas);
  rep.estimate = frac;
  rep.std_error =
      std::sqrt(std::max(0.0, frac * (1.0 - frac) /
                                  static_cast<double>(p.replicas)));
  if (p.fixation_bounded)
    rep.checks.push_back(check_ge("fixation_fraction", frac, p.fixation_min));
  if (p.boundary_stats) {
    const double beta = 1.0 - p.alpha;
    const double width = p.box_x1 - p.box_x0;
    const MeanVar tm = mean_var_u64(top);
    const double top_expect = beta * p.box_t * width;
    rep.checks.push_back(check_abs("top_edge_mean", tm.mean, top_expect,
                                   p.stat_rel_tol * top_expect));
    const MeanVar sm = mean_var_u64(side);
    const double side_expect = std::log(p.box_t / p.box_s) / beta;
    rep.checks.push_back(check_abs("side_edge_mean", sm.mean, side_expect,
                                   p.stat_rel_tol * side_expect));
    const MeanVar bm = mean_var_u64(bottom);
    const double bottom_expect = beta * p.box_s * width;
    rep.checks.push_back(check_abs("bottom_edge_mean", bm.mean, bottom_expect,
                                   p.stat_rel_tol * bottom_expect));
    rep.details["top_se"] = tm.std_error();
    rep.details["side_se"] = sm.std_error();
    rep.details["bottom_se"] = bm.std_error();
  }
  {
    std::vector<uint64_t> hist(G, 0);
    for (uint32_t s : stable_from) ++hist[s];
    rep.details["stable_from_histogram"] = hist;
  }
  finish_report(rep);
  rep.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return rep;
}

double exact_mean_roots(const std::vector<double>& labels,
                        const OffspringDistribution& dist) {
  if (dist.kind() == OffspringDistribution::Kind::Geometric)
    throw std::invalid_argument("exact_mean_roots needs finite support");
  std::vector<std::pair<uint32_t, double>> support;
  if (dist.kind() == OffspringDistribution::Kind::Dirac)
    support.emplace_back(dist.dirac_value(), 1.0);
  else
    for (const auto& [v, pr] : dist.table_entries())
      support.emplace_back(v, pr);
  const std::size_t n = labels.size(), k = support.size();
  double assigns = 1.0;
  for (std::size_t i = 0; i < n; ++i) assigns *= static_cast<double>(k);
  if (assigns > static_cast<double>(1 << 22))
    throw std::invalid_argument("exact_mean_roots: enumeration too large");
  std::vector<std::size_t> pick(n, 0);
  double total = 0.0;
  while (true) {
    double prob = 1.0;
    RootCounter counter;
    for (std::size_t i = 0; i < n; ++i) {
      prob *= support[pick[i]].second;
      counter.insert(labels[i], support[pick[i]].first);
    }
    total += prob * static_cast<double>(counter.root_count());
    std::size_t d = 0;
    while (d < n && ++pick[d] == k) pick[d++] = 0;
    if (d == n) break;
  }
  return total;
}

EstimateReport coupling_inequality_check(const CouplingParams& p,
                                         uint64_t seed, int jobs) {
  const auto t0 = std::chrono::steady_clock::now();
  if (p.n_sequences == 0)
    throw std::invalid_argument("coupling_inequality_check: no sequences");
  if (p.n_max < 2 || p.n_max > 10)
    throw std::invalid_argument(
        "coupling_inequality_check: n_max outside [2, 10]");
  if (std::fabs(p.mu.mean() - p.mu_prime.mean()) > 1e-9)
    throw std::invalid_argument(
        "coupling_inequality_check: offspring means differ");
  // The condensed law must sit on two consecutive integers.
  {
    uint32_t lo = 0, hi = 0;
    if (p.mu_prime.kind() == OffspringDistribution::Kind::Dirac) {
      lo = hi = p.mu_prime.dirac_value();
    } else if (p.mu_prime.kind() == OffspringDistribution::Kind::Table) {
      const auto& entries = p.mu_prime.table_entries();
      lo = entries.front().first;
      hi = entries.back().first;
    } else {
      throw std::invalid_argument(
          "coupling_inequality_check: mu_prime must have finite support");
    }
    if (hi - lo > 1)
      throw std::invalid_argument(
          "coupling_inequality_check: mu_prime support wider than {l, l+1}");
  }
  if (!p.exact && p.mc_replicas < 2)
    throw std::invalid_argument(
        "coupling_inequality_check: mc mode needs mc_replicas >= 2");

  std::vector<double> diff(p.n_sequences), viol(p.n_sequences);
  parallel_replicas(p.n_sequences, jobs, [&](uint64_t s) {
    RandomStream rng(seed, hash64("coupling_inequality_check", s));
    const std::size_t n =
        2 + static_cast<std::size_t>(rng.uniform_index(p.n_max - 1));
    std::vector<double> labels(n);
    for (double& x : labels) x = rng.next_double();
    double e_mu, e_mu_prime;
    if (p.exact) {
      e_mu = exact_mean_roots(labels, p.mu);
      e_mu_prime = exact_mean_roots(labels, p.mu_prime);
    } else {
      double s_mu = 0.0, s_mp = 0.0;
      for (uint64_t r = 0; r < p.mc_replicas; ++r) {
        RootCounter a, b;
        for (double x : labels) a.insert(x, p.mu.sample(rng));
        for (double x : labels) b.insert(x, p.mu_prime.sample(rng));
        s_mu += static_cast<double>(a.root_count());
        s_mp += static_cast<double>(b.root_count());
      }
      e_mu = s_mu / static_cast<double>(p.mc_replicas);
      e_mu_prime = s_mp / static_cast<double>(p.mc_replicas);
    }
    diff[s] = e_mu - e_mu_prime;
    viol[s] = std::max(0.0, e_mu_prime - e_mu);
  });

  EstimateReport rep;
  start_report(rep, "coupling_inequality_check", p.n_sequences, seed);
  add_param(rep, "mu", p.mu.describe());
  add_param(rep, "mu_prime", p.mu_prime.describe());
  add_param(rep, "n_max", std::to_string(p.n_max));
  add_param(rep, "exact", p.exact ? "1" : "0");
  const MeanVar mv = mean_var(diff);
  rep.estimate = mv.mean;
  rep.std_error = mv.std_error();
  const double worst = *std::max_element(viol.begin(), viol.end());
  rep.checks.push_back(check_le("max_violation", worst, 0.0,
                                p.exact ? 1e-12 : 3.0 * rep.std_error));
  rep.details["sequences"] = p.n_sequences;
  finish_report(rep);
  rep.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return rep;
}

EstimateReport heapable_probability(const HeapableParams& p, uint64_t seed,
                                    int jobs) {
  const auto t0 = std::chrono::steady_clock::now();
  if (p.n < 1) throw std::invalid_argument("heapable_probability: n < 1");
  if (p.replicas < 2)
    throw std::invalid_argument("heapable_probability: needs >= 2 replicas");
  std::vector<uint8_t> hits(p.replicas, 0);
  parallel_replicas(p.replicas, jobs, [&](uint64_t r) {
    RandomStream rng(seed, hash64("heapable_probability", r));
    RootCounter counter;
    for (uint64_t i = 0; i < p.n; ++i)
      counter.insert(rng.next_double(), p.dist.sample(rng));
    hits[r] = counter.root_count() == 1 ? 1 : 0;
  });
  uint64_t successes = 0;
  for (uint8_t h : hits) successes += h;
  const double phat =
      static_cast<double>(successes) / static_cast<double>(p.replicas);
  const WilsonInterval ci = wilson_interval(successes, p.replicas, kZ99);
  const double bound = 1.0 / static_cast<double>(p.n);

  EstimateReport rep;
  start_report(rep, "heapable_probability", p.replicas, seed);
  add_param(rep, "dist", p.dist.describe());
  add_param(rep, "n", std::to_string(p.n));
  rep.estimate = phat;
  rep.std_error = std::sqrt(
      std::max(0.0, phat * (1.0 - phat) / static_cast<double>(p.replicas)));
  rep.checks.push_back(check_le("bound_not_refuted", ci.lower, bound));
  if (p.assert_upper)
    rep.checks.push_back(check_le("bound_certified", ci.upper, bound));
  rep.details["wilson99"] = {ci.lower, ci.upper};
  rep.details["n_upper_bound"] = bound;
  rep.details["scaled_estimate_n2"] =
      phat * static_cast<double>(p.n) * static_cast<double>(p.n);
  finish_report(rep);
  rep.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return rep;
}

namespace {

const std::vector<std::string> kCommonOptional = {"seed", "jobs", "out", "csv"};

std::vector<std::string> with_common(std::vector<std::string> opt) {
  opt.insert(opt.end(), kCommonOptional.begin(), kCommonOptional.end());
  return opt;
}

void echo_params(EstimateReport& rep, const Manifest& m) {
  rep.parameters.clear();
  for (const auto& [k, v] : m.entries()) {
    if (k == "seed" || k == "jobs" || k == "out" || k == "csv") continue;
    rep.parameters.emplace_back(k, v);
  }
}

}  // namespace

EstimateReport run_experiment(const Manifest& m, const RunOverrides& ov) {
  const std::string experiment = m.has("experiment") ? m.get("experiment") : "";
  if (experiment.empty())
    throw std::invalid_argument("manifest: missing required key 'experiment'");
  const uint64_t seed = ov.has_seed ? ov.seed : m.get_u64("seed");
  const int jobs = ov.jobs > 0
                       ? ov.jobs
                       : static_cast<int>(m.get_u64_or("jobs", 1));

  EstimateReport rep;
  if (experiment == "estimate_c_slope") {
    m.require_keys({"experiment", "dist", "n_grid", "replicas"},
                   with_common({"bootstrap", "slope_min", "slope_max",
                                "reference", "ref_rel_tol", "ci_gt", "ci_lt",
                                "info_reference"}));
    SlopeParams p;
    p.dist = OffspringDistribution::parse(m.get("dist"));
    p.n_grid = m.get_u64_list("n_grid");
    p.replicas = m.get_u64("replicas");
    if (p.replicas == 0)
      throw std::invalid_argument("manifest: replicas must be >= 1");
    p.bootstrap = m.get_u64_or("bootstrap", 1000);
    p.bounded = m.has("slope_min") || m.has("slope_max");
    if (p.bounded) {
      p.slope_min = m.get_double("slope_min");
      p.slope_max = m.get_double("slope_max");
    }
    p.referenced = m.has("reference");
    if (p.referenced) {
      p.reference = m.get_double("reference");
      p.ref_rel_tol = m.get_double("ref_rel_tol");
    }
    p.ci_bounded = m.has("ci_gt") || m.has("ci_lt");
    if (p.ci_bounded) {
      p.ci_gt = m.get_double("ci_gt");
      p.ci_lt = m.get_double("ci_lt");
    }
    p.has_info_reference = m.has("info_reference");
    if (p.has_info_reference) p.info_reference = m.get_double("info_reference");
    rep = estimate_c_slope(p, seed, jobs);
  } else if (experiment == "estimate_c_via_d") {
    m.require_keys({"experiment", "dist", "n"},
                   with_common({"replicas", "exact", "reference",
                                "ref_rel_tol"}));
    ViaDParams p;
    p.dist = OffspringDistribution::parse(m.get("dist"));
    p.n = m.get_u64("n");
    p.exact = m.get_bool_or("exact", false);
    if (!p.exact) {
      p.replicas = m.get_u64("replicas");
      if (p.replicas == 0)
        throw std::invalid_argument("manifest: replicas must be >= 1");
    }
    p.referenced = m.has("reference");
    if (p.referenced) {
      p.reference = m.get_double("reference");
      p.ref_rel_tol = m.get_double_or("ref_rel_tol", 0.0);
    }
    rep = estimate_c_via_d(p, seed, jobs);
  } else if (experiment == "stationarity_suite") {
    m.require_keys({"experiment", "lambda", "alpha", "t_list", "replicas"},
                   with_common({"level", "eps_trunc"}));
    StationarityParams p;
    p.lambda = m.get_double("lambda");
    p.alpha = m.get_double("alpha");
    p.t_list = m.get_double_list("t_list");
    p.replicas = m.get_u64("replicas");
    if (p.replicas == 0)
      throw std::invalid_argument("manifest: replicas must be >= 1");
    p.level = m.get_double_or("level", 0.01);
    p.eps_trunc = m.get_double_or("eps_trunc", 0.0);
    rep = stationarity_suite(p, seed, jobs);
  } else if (experiment == "halfplane_fixation") {
    m.require_keys({"experiment", "dist", "box", "b_grid", "big_a",
                    "replicas"},
                   with_common({"fixation_min", "boundary_stats", "alpha",
                                "stat_rel_tol"}));
    HalfplaneParams p;
    p.dist = OffspringDistribution::parse(m.get("dist"));
    const std::vector<double> box = m.get_double_list("box");
    if (box.size() != 4)
      throw std::invalid_argument("manifest: box must be x0,x1,s,t");
    p.box_x0 = box[0];
    p.box_x1 = box[1];
    p.box_s = box[2];
    p.box_t = box[3];
    p.b_grid = m.get_double_list("b_grid");
    p.big_a = m.get_double("big_a");
    p.replicas = m.get_u64("replicas");
    if (p.replicas == 0)
      throw std::invalid_argument("manifest: replicas must be >= 1");
    p.fixation_bounded = m.has("fixation_min");
    if (p.fixation_bounded) p.fixation_min = m.get_double("fixation_min");
    p.boundary_stats = m.get_bool_or("boundary_stats", false);
    if (p.boundary_stats) p.alpha = m.get_double("alpha");
    p.stat_rel_tol = m.get_double_or("stat_rel_tol", 0.05);
    rep = halfplane_fixation(p, seed, jobs);
  } else if (experiment == "coupling_inequality_check") {
    m.require_keys({"experiment", "mu", "mu_prime", "n_sequences"},
                   with_common({"n_max", "exact", "mc_replicas"}));
    CouplingParams p;
    p.mu = OffspringDistribution::parse(m.get("mu"));
    p.mu_prime = OffspringDistribution::parse(m.get("mu_prime"));
    p.n_sequences = m.get_u64("n_sequences");
    if (p.n_sequences == 0)
      throw std::invalid_argument("manifest: n_sequences must be >= 1");
    p.n_max = m.get_u64_or("n_max", 8);
    p.exact = m.get_bool_or("exact", true);
    p.mc_replicas = m.get_u64_or("mc_replicas", 0);
    rep = coupling_inequality_check(p, seed, jobs);
  } else if (experiment == "heapable_probability") {
    m.require_keys({"experiment", "dist", "n", "replicas"},
                   with_common({"assert_upper"}));
    HeapableParams p;
    p.dist = OffspringDistribution::parse(m.get("dist"));
    p.n = m.get_u64("n");
    p.replicas = m.get_u64("replicas");
    if (p.replicas == 0)
      throw std::invalid_argument("manifest: replicas must be >= 1");
    p.assert_upper = m.get_bool_or("assert_upper", false);
    rep = heapable_probability(p, seed, jobs);
  } else {
    throw std::invalid_argument(
        "manifest: unknown experiment '" + experiment +
        "'; known: estimate_c_slope, estimate_c_via_d, stationarity_suite, "
        "halfplane_fixation, coupling_inequality_check, heapable_probability");
  }
  echo_params(rep, m);
  return rep;
}

}  // namespace heapforest
