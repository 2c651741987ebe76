#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "doctest.h"
#include "heapforest/geometric.hpp"
#include "heapforest/hammersley.hpp"
#include "heapforest/heap_sort.hpp"
#include "heapforest/random.hpp"
#include "heapforest/stats.hpp"

using namespace heapforest;

namespace {

std::vector<double> brute_positions(const SourcesSinks& boundary,
                                    const std::vector<ColoredAtom>& atoms,
                                    double t) {
  std::set<double> alive;
  for (const auto& [label, lives] : boundary.sources) alive.insert(label);
  std::size_t ai = 0, si = 0;
  while (true) {
    const bool has_atom = ai < atoms.size() && atoms[ai].time <= t;
    const bool has_sink =
        si < boundary.sinks.size() && boundary.sinks[si] <= t;
    if (!has_atom && !has_sink) break;
    if (has_atom && (!has_sink || atoms[ai].time <= boundary.sinks[si])) {
      const ColoredAtom& a = atoms[ai++];
      auto it = alive.lower_bound(a.label);
      if (a.red && it != alive.begin()) alive.erase(std::prev(it));
      alive.insert(a.label);
    } else {
      const bool red =
          boundary.sink_red.empty() ? true : boundary.sink_red[si];
      ++si;
      if (red && !alive.empty()) alive.erase(std::prev(alive.end()));
    }
  }
  return {alive.begin(), alive.end()};
}

}  // namespace

TEST_CASE("all-red atoms reproduce the unit-lives line process") {
  RandomStream rng(11, 1);
  for (int round = 0; round < 20; ++round) {
    const std::vector<Atom> plain = sample_marked_ppp(
        0.0, 1.0, 6.0, OffspringDistribution::dirac(1), rng);
    std::vector<ColoredAtom> colored;
    for (const Atom& a : plain) colored.push_back({a.label, a.time, true});
    const RedBlueRecord rb =
        simulate_redblue_atoms(0.0, 1.0, 6.0, colored, SourcesSinks{});
    const SortState sorted = sort_atoms(plain);
    std::vector<double> expect;
    for (const auto& [label, id] : sorted.alive()) expect.push_back(label);
    CHECK(rb.final_positions == expect);
    CHECK(rb.root_events.size() == sorted.root_count());
  }
}

TEST_CASE("particle count mean matches the geometric-lives process") {
  // Cross-implementation oracle at alpha = 1/2, t = 10.
  RandomStream rng(22, 2);
  const uint64_t reps = 10000;
  std::vector<double> redblue(reps), direct(reps);
  for (uint64_t r = 0; r < reps; ++r) {
    const RedBlueRecord rb =
        simulate_redblue(0.0, 1.0, 10.0, 0.5, SourcesSinks{}, rng);
    redblue[r] = static_cast<double>(rb.final_positions.size());
    const GraphicalRecord rec =
        simulate(0.0, 1.0, 10.0, OffspringDistribution::geometric(0.5),
                 SourcesSinks{}, rng);
    direct[r] = static_cast<double>(rec.configuration_at(10.0).size());
  }
  const MeanVar a = mean_var(redblue), b = mean_var(direct);
  CHECK(std::fabs(a.mean - b.mean) <= 0.05 * b.mean);
}

TEST_CASE("particle count distribution matches in law") {
  // Two-sample chi-square at alpha = 2/3, t = 5, 1% level.
  RandomStream rng(33, 3);
  const uint64_t reps = 10000;
  std::vector<uint64_t> redblue(reps), direct(reps);
  for (uint64_t r = 0; r < reps; ++r) {
    const RedBlueRecord rb =
        simulate_redblue(0.0, 1.0, 5.0, 2.0 / 3.0, SourcesSinks{}, rng);
    redblue[r] = rb.final_positions.size();
    const GraphicalRecord rec = simulate(
        0.0, 1.0, 5.0, OffspringDistribution::geometric(2.0 / 3.0),
        SourcesSinks{}, rng);
    direct[r] = rec.configuration_at(5.0).size();
  }
  const Chi2Result chi2 = chi2_two_sample(redblue, direct);
  CHECK(chi2.p_value >= 0.01);
}

TEST_CASE("blue sinks record lines but never remove particles") {
  RandomStream rng(44, 4);
  const std::vector<Atom> plain = sample_marked_ppp(
      0.0, 1.0, 5.0, OffspringDistribution::dirac(1), rng);
  std::vector<ColoredAtom> colored;
  for (const Atom& a : plain)
    colored.push_back({a.label, a.time, rng.next_double() < 0.5});

  SourcesSinks with_blue;
  with_blue.sinks = {1.0, 2.0, 3.0, 4.0};
  with_blue.sink_red = {false, false, false, false};
  const RedBlueRecord a =
      simulate_redblue_atoms(0.0, 1.0, 5.0, colored, with_blue);
  const RedBlueRecord b =
      simulate_redblue_atoms(0.0, 1.0, 5.0, colored, SourcesSinks{});
  CHECK(a.final_positions == b.final_positions);
  CHECK(a.horizontal_segments.size() > b.horizontal_segments.size());

  // A red sink at the same time does remove the maximum.
  SourcesSinks with_red = with_blue;
  with_red.sink_red = {true, false, false, false};
  const RedBlueRecord c =
      simulate_redblue_atoms(0.0, 1.0, 5.0, colored, with_red);
  CHECK(c.final_positions.size() < a.final_positions.size());
}

TEST_CASE("red/blue position replay matches direct recomputation") {
  RandomStream rng(55, 5);
  SourcesSinks boundary;
  boundary.sources = {{0.2, 1}, {0.7, 1}};
  boundary.sinks = {0.9, 2.2, 3.4};
  boundary.sink_red = {true, false, true};
  const std::vector<Atom> plain = sample_marked_ppp(
      0.0, 1.0, 4.0, OffspringDistribution::dirac(1), rng);
  std::vector<ColoredAtom> colored;
  for (const Atom& a : plain)
    colored.push_back({a.label, a.time, rng.next_double() < 0.4});
  const RedBlueRecord rec =
      simulate_redblue_atoms(0.0, 1.0, 4.0, colored, boundary, 3);
  for (double t : {0.0, 0.5, 0.9, 1.7, 2.2, 3.0, 4.0})
    CHECK(rec.positions_at(t) == brute_positions(boundary, colored, t));
}

TEST_CASE("tagged particle: path shape, gaps and determinism") {
  const std::vector<double> sample_times = {0.0, 1.0, 2.0, 4.0};
  RandomStream rng(66, 6);
  RandomStream rng_again(66, 6);
  const uint64_t reps = 500;
  std::vector<double> first_gap_t4, first_gap_t0, second_gap_t4;
  for (uint64_t r = 0; r < reps; ++r) {
    const TaggedTrajectory traj =
        track_tagged_particle(1.0, 0.5, 4.0, 12.0, 3, rng, sample_times);
    const TaggedTrajectory traj2 = track_tagged_particle(
        1.0, 0.5, 4.0, 12.0, 3, rng_again, sample_times);
    CHECK(traj2.x == traj.x);
    CHECK(traj2.gaps == traj.gaps);

    REQUIRE(traj.times == sample_times);
    REQUIRE(traj.x.size() == 4);
    CHECK(traj.x.front() == traj.start_position);
    CHECK(traj.start_position >= 0.0);
    for (std::size_t i = 1; i < traj.x.size(); ++i)
      CHECK(traj.x[i] >= traj.x[i - 1]);
    for (const std::vector<double>& row : traj.gaps) {
      REQUIRE(row.size() == 3);
      for (double g : row) CHECK(g > 0.0);
    }
    first_gap_t0.push_back(traj.gaps.front()[0]);
    first_gap_t4.push_back(traj.gaps.back()[0]);
    second_gap_t4.push_back(traj.gaps.back()[1]);
  }
  // At t = 0 the right gaps are the source spacings, Exp(lambda).
  const MeanVar g0 = mean_var(first_gap_t0);
  CHECK(std::fabs(g0.mean - 1.0) <= 3.0 * g0.std_error());
  // At t = 4 the environment has rate lambda + (1-alpha)t = 3.
  const MeanVar g4 = mean_var(first_gap_t4);
  CHECK(std::fabs(g4.mean - 1.0 / 3.0) <= 3.0 * g4.std_error());
  // Neighbouring gaps are uncorrelated.
  const double corr = pearson_correlation(first_gap_t4, second_gap_t4);
  CHECK(std::fabs(corr) <= 3.0 / std::sqrt(static_cast<double>(reps)));
}

TEST_CASE("tagged particle rejects bad parameters") {
  RandomStream rng(77, 7);
  CHECK_THROWS(track_tagged_particle(0.0, 0.5, 4.0, 12.0, 3, rng, {0.0}));
  CHECK_THROWS(track_tagged_particle(1.0, 1.5, 4.0, 12.0, 3, rng, {0.0}));
}

TEST_CASE("trajectory csv layout") {
  RandomStream rng(88, 8);
  const TaggedTrajectory traj =
      track_tagged_particle(1.0, 0.5, 2.0, 10.0, 2, rng, {0.0, 1.0, 2.0});
  const std::string csv = trajectory_to_csv(traj);
  CHECK(csv.rfind("t,x,gap_1,gap_2\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);  // header + 3 rows
}

TEST_CASE("crossing tree count is bounded and saturates in the window") {
  RandomStream rng(99, 9);
  const uint64_t reps = 300;
  std::vector<double> means;
  std::vector<double> ses;
  for (double w : {5.0, 10.0, 20.0}) {
    std::vector<double> counts(reps);
    for (uint64_t r = 0; r < reps; ++r)
      counts[r] = static_cast<double>(
          count_crossing_trees(1.0, 0.5, 5.0, w, 10.0, rng));
    const MeanVar mv = mean_var(counts);
    means.push_back(mv.mean);
    ses.push_back(mv.std_error());
  }
  // Wider windows can only add crossing trees, and the addition dries up:
  // the increment from w=10 to w=20 is statistically negligible.
  CHECK(means[1] >= means[0] - 3.0 * std::hypot(ses[0], ses[1]));
  CHECK(means[2] >= means[1] - 3.0 * std::hypot(ses[1], ses[2]));
  CHECK(std::fabs(means[2] - means[1]) <=
        3.0 * std::hypot(ses[1], ses[2]) + 0.05);
  for (double m : means) CHECK(m < 8.0);
}
