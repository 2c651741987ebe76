// Acceptance gate: eleven end-to-end criteria, one [PASS]/[FAIL] line each.
// Exit code 0 iff every criterion (including its time budget) holds.
// Run a subset with explicit ids: ./acceptance 5 7

#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "heapforest/distributions.hpp"
#include "heapforest/experiments.hpp"
#include "heapforest/geometric.hpp"
#include "heapforest/heap_sort.hpp"
#include "heapforest/random.hpp"
#include "heapforest/root_process.hpp"
#include "heapforest/stats.hpp"

using namespace heapforest;

namespace {

constexpr uint64_t kSeed = 424242;

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

std::string make_dir() {
  char tmpl[] = "/tmp/heapforest-acc-XXXXXX";
  const char* dir = mkdtemp(tmpl);
  if (dir == nullptr) {
    std::perror("mkdtemp");
    std::exit(1);
  }
  return dir;
}

struct RunResult {
  int code = -1;
  std::string out;
  std::string err;
};

RunResult run_cli(const std::string& dir, const std::string& args) {
  const std::string out_path = dir + "/stdout.txt";
  const std::string err_path = dir + "/stderr.txt";
  const std::string cmd = std::string(HEAPFOREST_CLI_PATH) + " " + args +
                          " > " + out_path + " 2> " + err_path;
  const int status = std::system(cmd.c_str());
  RunResult r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(out_path);
  r.err = slurp(err_path);
  return r;
}

std::string failing_checks(const EstimateReport& rep) {
  std::string msg;
  for (const CheckResult& c : rep.checks)
    if (!c.pass) {
      if (!msg.empty()) msg += ", ";
      char buf[160];
      std::snprintf(buf, sizeof buf, "%s observed %.5g expected %.5g tol %.3g",
                    c.name.c_str(), c.observed, c.expected, c.tolerance);
      msg += buf;
    }
  return msg;
}

std::vector<double> distinct_labels(RandomStream& rng, std::size_t n) {
  std::vector<double> labels(n);
restart:
  for (double& v : labels) v = rng.next_double();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (labels[i] == labels[j]) goto restart;
  return labels;
}

// 1. Two fixed sequences through the CLI binary.
std::string criterion_1() {
  const std::string dir = make_dir();
  spit(dir + "/six.txt", "0.1,2\n0.8,3\n0.4,1\n0.2,2\n0.5,2\n0.15,3\n");
  const RunResult a = run_cli(dir, "sort " + dir + "/six.txt");
  if (a.code != 0 || a.out != "3\n")
    return "six-pair file: want exit 0 and '3', got exit " +
           std::to_string(a.code) + " and '" + a.out + "'";
  spit(dir + "/perm.txt", "0.3,1\n0.6,1\n0.1,1\n0.7,1\n0.5,1\n0.4,1\n0.2,1\n");
  const RunResult b = run_cli(dir, "sort " + dir + "/perm.txt");
  if (b.code != 0 || b.out != "4\n")
    return "seven-label stack file: want exit 0 and '4', got exit " +
           std::to_string(b.code) + " and '" + b.out + "'";
  return "";
}

// 2. Sorter optimality vs brute force, and the unit-lives reduction to the
// longest strictly decreasing subsequence.
std::string criterion_2() {
  RandomStream rng(kSeed, hash64("acceptance/optimality", 0));
  for (int round = 0; round < 1000; ++round) {
    const std::size_t n = 1 + rng.uniform_index(7);
    const std::vector<double> labels = distinct_labels(rng, n);
    std::vector<std::pair<double, uint32_t>> items;
    for (double v : labels)
      items.emplace_back(v, 1 + static_cast<uint32_t>(rng.uniform_index(3)));
    const uint64_t sorted = sort_items(items).root_count();
    const uint64_t best = min_heaps_bruteforce(items);
    if (sorted != best)
      return "round " + std::to_string(round) + ": sorter used " +
             std::to_string(sorted) + " heaps, optimum is " +
             std::to_string(best);
  }
  for (int round = 0; round < 1000; ++round) {
    const std::size_t n = 1 + rng.uniform_index(7);
    const std::vector<double> labels = distinct_labels(rng, n);
    std::vector<std::pair<double, uint32_t>> items;
    for (double v : labels) items.emplace_back(v, 1);
    const uint64_t sorted = sort_items(items).root_count();
    const uint64_t lds = longest_decreasing_subsequence(labels);
    if (sorted != lds)
      return "unit-lives round " + std::to_string(round) + ": roots " +
             std::to_string(sorted) + " != decreasing subsequence " +
             std::to_string(lds);
  }
  return "";
}

// 3. Life sweeps: root counts step by -1 or 0 and zero steps absorb.
std::string criterion_3() {
  RandomStream rng(kSeed, hash64("acceptance/lifesweep", 0));
  for (int round = 0; round < 1000; ++round) {
    const std::size_t n = 2 + rng.uniform_index(6);
    const std::vector<double> labels = distinct_labels(rng, n);
    std::vector<uint32_t> base(n);
    for (uint32_t& v : base)
      v = 1 + static_cast<uint32_t>(rng.uniform_index(3));
    const std::size_t i0 = rng.uniform_index(n);
    const std::vector<uint64_t> counts = life_sweep(labels, base, i0, 6);
    bool absorbed = false;
    for (std::size_t m = 1; m < counts.size(); ++m) {
      const int64_t diff = static_cast<int64_t>(counts[m]) -
                           static_cast<int64_t>(counts[m - 1]);
      if (diff != 0 && diff != -1)
        return "round " + std::to_string(round) + ": step of " +
               std::to_string(diff) + " at m = " + std::to_string(m + 1);
      if (absorbed && diff != 0)
        return "round " + std::to_string(round) +
               ": decrease after a zero step at m = " + std::to_string(m + 1);
      if (diff == 0) absorbed = true;
    }
  }
  return "";
}

// 4. Exact coupling inequality on 100 random label sequences.
std::string criterion_4() {
  CouplingParams p;
  p.mu = OffspringDistribution::parse("table:1=0.5,3=0.5");
  p.mu_prime = OffspringDistribution::dirac(2);
  p.n_sequences = 100;
  p.n_max = 8;
  p.exact = true;
  const EstimateReport rep = coupling_inequality_check(p, kSeed, 1);
  if (!rep.pass) return failing_checks(rep);
  std::printf("         largest mean-roots excess of the condensed law: %.3g\n",
              rep.estimate);
  return "";
}

// 5. Growth constant, geometric lives: slope bounds, reference value at a
// second parameter, and agreement between the two estimators.
std::string criterion_5() {
  SlopeParams s1;
  s1.dist = OffspringDistribution::geometric(0.5);
  s1.n_grid = {10000, 100000, 1000000};
  s1.replicas = 100;
  s1.bootstrap = 1000;
  s1.bounded = true;
  s1.slope_min = 1.8;
  s1.slope_max = 2.2;
  const EstimateReport ra = estimate_c_slope(s1, kSeed, 1);
  const double a_lo = ra.details.at("ci95")[0].get<double>();
  const double a_hi = ra.details.at("ci95")[1].get<double>();
  std::printf("         slope alpha=1/2: %.4f, ci95 [%.4f, %.4f]\n",
              ra.estimate, a_lo, a_hi);
  if (!ra.pass) return "alpha=1/2 slope: " + failing_checks(ra);

  SlopeParams s2 = s1;
  s2.dist = OffspringDistribution::geometric(4.0 / 21.0);
  s2.bounded = false;
  s2.referenced = true;
  s2.reference = 21.0 / 17.0;
  s2.ref_rel_tol = 0.10;
  const EstimateReport rb = estimate_c_slope(s2, kSeed, 1);
  std::printf("         slope alpha=4/21: %.4f vs reference %.4f\n",
              rb.estimate, 21.0 / 17.0);
  if (!rb.pass) return "alpha=4/21 slope: " + failing_checks(rb);

  ViaDParams vd;
  vd.dist = OffspringDistribution::geometric(0.5);
  vd.n = 100000;
  vd.replicas = 2000;
  vd.referenced = true;
  vd.reference = 2.0;
  vd.ref_rel_tol = 0.10;
  const EstimateReport rd = estimate_c_via_d(vd, kSeed, 1);
  std::printf("         increment estimate alpha=1/2: %.4f +- %.4f\n",
              rd.estimate, rd.std_error);
  if (!rd.pass) return "increment estimator: " + failing_checks(rd);

  const double d_lo = rd.estimate - 1.96 * rd.std_error;
  const double d_hi = rd.estimate + 1.96 * rd.std_error;
  if (std::max(a_lo, d_lo) > std::min(a_hi, d_hi)) {
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "estimator CIs do not overlap: slope [%.4f, %.4f] vs "
                  "increment [%.4f, %.4f]",
                  a_lo, a_hi, d_lo, d_hi);
    return buf;
  }
  return "";
}

// 6. Two-lives growth constant: bootstrap CI inside (1, 2); the point value
// is compared to 1.618 for information only.
std::string criterion_6() {
  SlopeParams p;
  p.dist = OffspringDistribution::dirac(2);
  p.n_grid = {10000, 100000, 1000000};
  p.replicas = 100;
  p.bootstrap = 1000;
  p.ci_bounded = true;
  p.ci_gt = 1.0;
  p.ci_lt = 2.0;
  p.has_info_reference = true;
  p.info_reference = 1.618;
  const EstimateReport rep = estimate_c_slope(p, kSeed, 1);
  std::printf(
      "         slope: %.4f, ci95 [%.4f, %.4f]; gap to 1.618: %+.4f "
      "(informational)\n",
      rep.estimate, rep.details.at("ci95")[0].get<double>(),
      rep.details.at("ci95")[1].get<double>(),
      rep.details.at("info_reference_gap").get<double>());
  if (!rep.pass) return failing_checks(rep);
  return "";
}

// 7. Stationarity suites at three parameter pairs. A screening run at 10^4
// replicas fires a check roughly once per ten gate executions by pure
// multiplicity (about forty 3-sigma tests), so any flagged combo is retried
// once at tenfold replicas under a fixed shifted seed, where a real bias of
// the size the screen can flag stands out at ten sigma instead of three.
std::string criterion_7() {
  struct Combo {
    double lambda, alpha, eps;
  };
  const std::vector<Combo> combos = {
      {1.0, 0.5, 0.0}, {0.0, 0.5, 1e-8}, {2.0, 1.0 / 3.0, 0.0}};
  std::string msg;
  for (std::size_t i = 0; i < combos.size(); ++i) {
    const Combo& c = combos[i];
    StationarityParams p;
    p.lambda = c.lambda;
    p.alpha = c.alpha;
    p.t_list = {1.0, 3.0};
    p.replicas = 10000;
    p.level = 0.01;
    p.eps_trunc = c.eps;
    EstimateReport rep = stationarity_suite(p, kSeed, 1);
    std::printf(
        "         lambda=%.3g alpha=%.3g: %zu checks, mean count at t=3: "
        "%.3f\n",
        c.lambda, c.alpha, rep.checks.size(), rep.estimate);
    if (!rep.pass) {
      std::printf("         flagged (%s); confirming at 10x replicas\n",
                  failing_checks(rep).c_str());
      p.replicas = 100000;
      rep = stationarity_suite(p, kSeed + 1000 + i, 1);
      std::printf("         confirmation: %s\n",
                  rep.pass ? "clean" : failing_checks(rep).c_str());
    }
    if (!rep.pass) {
      if (!msg.empty()) msg += "; ";
      char buf[64];
      std::snprintf(buf, sizeof buf, "(lambda=%.3g, alpha=%.3g): ", c.lambda,
                    c.alpha);
      msg += buf + failing_checks(rep);
    }
  }
  return msg;
}

// 8. Falling-map inequalities, pathwise on 1000 randomized instances.
std::string criterion_8() {
  RandomStream rng(kSeed, hash64("acceptance/fallingmap", 0));
  for (int round = 0; round < 1000; ++round) {
    const double a_f = 0.5 + 0.5 * rng.next_double();
    const double t_box = 2.0 + 2.0 * rng.next_double();
    const OffspringDistribution dist =
        round % 2 == 0 ? OffspringDistribution::geometric(0.5)
                       : OffspringDistribution::dirac(2);
    const std::vector<Atom> xi = sample_marked_ppp(0.0, 1.0, 6.0, dist, rng);
    std::vector<std::pair<double, double>> pts;
    for (int i = 0; i < 3; ++i)
      pts.emplace_back(a_f * rng.next_double(), 2.0 * rng.next_double());
    const MonotoneBoundary f = MonotoneBoundary::lowest_majorant(pts, a_f);
    std::vector<Atom> usable;
    for (const Atom& a : xi)
      if (a.label < a_f && a.time > f.value(a.label)) usable.push_back(a);
    std::vector<Atom> in_box;
    for (const Atom& a : usable)
      if (a.time <= t_box) in_box.push_back(a);

    const uint64_t r_plain = root_count_of_atoms(in_box);
    const uint64_t r_dropped_box = root_count_of_atoms(falling_map(in_box, f));
    std::vector<Atom> dropped_in_box;
    for (const Atom& a : falling_map(usable, f))
      if (a.time <= t_box) dropped_in_box.push_back(a);
    const uint64_t r_dropped_all = root_count_of_atoms(dropped_in_box);

    if (r_plain > r_dropped_box)
      return "round " + std::to_string(round) + ": dropping lost roots (" +
             std::to_string(r_plain) + " > " + std::to_string(r_dropped_box) +
             ")";
    if (r_dropped_box > r_dropped_all)
      return "round " + std::to_string(round) +
             ": box-first drop beat drop-first box (" +
             std::to_string(r_dropped_box) + " > " +
             std::to_string(r_dropped_all) + ")";
  }
  return "";
}

// 9. Tagged particle: right-gap law at t=4 and the drift at t=50 and 200.
std::string criterion_9() {
  const uint64_t replicas = 10000;
  std::vector<double> gap4(replicas), d50(replicas), d200(replicas);
  for (uint64_t r = 0; r < replicas; ++r) {
    RandomStream rng(kSeed, hash64("acceptance/tagged", r));
    const TaggedTrajectory traj = track_tagged_particle(
        1.0, 0.5, 200.0, 6.0, 1, rng, {4.0, 50.0, 200.0});
    gap4[r] = traj.gaps[0][0];
    d50[r] = traj.x[1] - traj.start_position;
    d200[r] = traj.x[2] - traj.start_position;
  }
  const MeanVar m4 = mean_var(gap4);
  const MeanVar m50 = mean_var(d50);
  const MeanVar m200 = mean_var(d200);
  std::printf(
      "         gap(4): %.4f (want 1/3), drift(50): %.4f (want %.4f), "
      "drift(200): %.4f (want 1 within 5%%)\n",
      m4.mean, m50.mean, 25.0 / 26.0, m200.mean);
  char buf[128];
  if (std::fabs(m4.mean - 1.0 / 3.0) > 3.0 * m4.std_error()) {
    std::snprintf(buf, sizeof buf, "gap mean at t=4: %.4f vs 1/3 (se %.4f)",
                  m4.mean, m4.std_error());
    return buf;
  }
  if (std::fabs(m50.mean - 25.0 / 26.0) > 3.0 * m50.std_error()) {
    std::snprintf(buf, sizeof buf, "drift at t=50: %.4f vs %.4f (se %.4f)",
                  m50.mean, 25.0 / 26.0, m50.std_error());
    return buf;
  }
  if (std::fabs(m200.mean - 1.0) > 0.05) {
    std::snprintf(buf, sizeof buf, "drift at t=200: %.4f vs 1.0 +- 0.05",
                  m200.mean);
    return buf;
  }
  return "";
}

// 10. Half-plane: edge-crossing statistics at alpha=2/3 and trace fixation
// for two lives per vertex.
std::string criterion_10() {
  HalfplaneParams st;
  st.dist = OffspringDistribution::geometric(2.0 / 3.0);
  st.box_x0 = 0.0;
  st.box_x1 = 4.0;
  st.box_s = 3.0;
  st.box_t = 12.0;
  // Edge-count means hold for the infinite half-plane; a finite right wall
  // at b leaks unkilled mass that drifts left at speed 1/density^2, biasing
  // a box at distance D by roughly 3*width/D. Keep D ~ 150 so the residual
  // (~2%) sits well inside the 5% tolerance.
  st.b_grid = {150.0, 160.0};
  st.big_a = -25.0;
  st.replicas = 8000;
  st.boundary_stats = true;
  st.alpha = 2.0 / 3.0;
  st.stat_rel_tol = 0.05;
  const EstimateReport ra = halfplane_fixation(st, kSeed, 1);
  for (const CheckResult& c : ra.checks)
    if (c.name == "top_edge_mean" || c.name == "side_edge_mean" ||
        c.name == "bottom_edge_mean")
      std::printf("         %s: %.3f vs %.3f\n", c.name.c_str(), c.observed,
                  c.expected);
  if (!ra.pass) return "boundary statistics: " + failing_checks(ra);

  HalfplaneParams fx;
  fx.dist = OffspringDistribution::dirac(2);
  fx.box_x0 = 0.0;
  fx.box_x1 = 1.0;
  fx.box_s = 1.0;
  fx.box_t = 2.0;
  fx.b_grid = {10.0, 20.0, 30.0, 40.0, 50.0};
  fx.big_a = -10.0;
  fx.replicas = 1000;
  fx.fixation_bounded = true;
  fx.fixation_min = 0.95;
  const EstimateReport rb = halfplane_fixation(fx, kSeed, 1);
  std::printf("         fixation fraction by the last cutoff: %.3f\n",
              rb.estimate);
  if (!rb.pass) return "fixation: " + failing_checks(rb);
  return "";
}

// 11. Byte-exact reproducibility of every experiment report and of the
// renderer, serial and parallel.
std::string criterion_11() {
  const std::string dir = make_dir();
  const std::vector<std::pair<std::string, std::string>> manifests = {
      {"slope",
       "experiment = estimate_c_slope\ndist = geom:0.5\n"
       "n_grid = 1000, 4000\nreplicas = 30\nbootstrap = 200\nseed = 7\n"},
      {"via_d",
       "experiment = estimate_c_via_d\ndist = table:1=0.5,10=0.5\nn = 2\n"
       "exact = true\nreference = 1.25\nseed = 7\n"},
      {"stationarity",
       "experiment = stationarity_suite\nlambda = 1\nalpha = 0.5\n"
       "t_list = 2\nreplicas = 400\nseed = 2024\n"},
      {"halfplane",
       "experiment = halfplane_fixation\ndist = dirac:2\nbox = 0, 1, 1, 3\n"
       "b_grid = 6, 12\nbig_a = -6\nreplicas = 24\nfixation_min = 0.7\n"
       "seed = 11\n"},
      {"coupling",
       "experiment = coupling_inequality_check\nmu = table:1=0.5,3=0.5\n"
       "mu_prime = dirac:2\nn_sequences = 30\nseed = 3\n"},
      {"heapable",
       "experiment = heapable_probability\ndist = geom:0.5\nn = 2\n"
       "replicas = 2000\nseed = 5\n"},
  };
  for (const auto& [name, text] : manifests) {
    const std::string path = dir + "/" + name + ".cfg";
    spit(path, text);
    const RunResult a = run_cli(dir, "experiment --manifest " + path);
    if (a.code != 0)
      return name + ": first run exited " + std::to_string(a.code) + ": " +
             a.err;
    const RunResult b = run_cli(dir, "experiment --manifest " + path);
    if (b.code != 0 || b.out != a.out)
      return name + ": rerun with the recorded seed differs";
    const RunResult c =
        run_cli(dir, "experiment --manifest " + path + " --jobs 3");
    if (c.code != 0 || c.out != a.out)
      return name + ": parallel run differs from serial";
  }

  const std::string rec = dir + "/rec.json";
  if (run_cli(dir, "simulate --t 3 --dist geom:0.5 --seed 9 --out " + rec)
          .code != 0)
    return "simulate failed";
  const RunResult r1 = run_cli(dir, "render " + rec + " --color-trees");
  const RunResult r2 = run_cli(dir, "render " + rec + " --color-trees");
  if (r1.code != 0 || r2.code != 0 || r1.out != r2.out)
    return "renders of the same record differ";
  return "";
}

}  // namespace

int main(int argc, char** argv) {
  struct Criterion {
    int id;
    const char* what;
    std::function<std::string()> run;
    double budget_seconds;
  };
  const std::vector<Criterion> criteria = {
      {1, "known sequences sort to 3 and 4 roots through the CLI",
       criterion_1, 1.0},
      {2, "sorter is optimal and matches the decreasing-subsequence rule",
       criterion_2, 60.0},
      {3, "life sweeps step by -1 or 0 and absorb at zero", criterion_3,
       60.0},
      {4, "condensing lives never increases the exact mean root count",
       criterion_4, 300.0},
      {5, "geometric growth constant: slope bounds and estimator agreement",
       criterion_5, 1800.0},
      {6, "two-lives growth constant: slope CI inside (1, 2)", criterion_6,
       900.0},
      {7, "stationarity suites pass at three parameter pairs", criterion_7,
       1200.0},
      {8, "falling-map root-count inequalities hold pathwise", criterion_8,
       120.0},
      {9, "tagged particle: right-gap law and drift", criterion_9, 900.0},
      {10, "half-plane edge statistics and trace fixation", criterion_10,
       1200.0},
      {11, "reports and renders reproduce byte-exactly", criterion_11, 0.0},
  };

  std::vector<int> only;
  for (int i = 1; i < argc; ++i) only.push_back(std::atoi(argv[i]));

  int failures = 0;
  for (const Criterion& c : criteria) {
    if (!only.empty() &&
        std::find(only.begin(), only.end(), c.id) == only.end())
      continue;
    const auto t0 = std::chrono::steady_clock::now();
    std::string msg = c.run();
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    if (msg.empty() && c.budget_seconds > 0.0 && secs > c.budget_seconds) {
      char buf[96];
      std::snprintf(buf, sizeof buf, "over time budget: %.1f s > %.0f s",
                    secs, c.budget_seconds);
      msg = buf;
    }
    if (msg.empty()) {
      std::printf("[PASS] criterion %2d: %s (%.1f s)\n", c.id, c.what, secs);
    } else {
      std::printf("[FAIL] criterion %2d: %s (%.1f s): %s\n", c.id, c.what,
                  secs, msg.c_str());
      ++failures;
    }
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
