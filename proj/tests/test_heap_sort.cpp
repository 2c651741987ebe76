#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "doctest.h"
#include "heapforest/heap_sort.hpp"
#include "heapforest/random.hpp"
#include "heapforest/stats.hpp"

using namespace heapforest;

namespace {

// Quadratic reference for the longest strictly decreasing subsequence.
uint64_t lds_dp(const std::vector<double>& xs) {
  if (xs.empty()) return 0;
  std::vector<uint64_t> len(xs.size(), 1);
  uint64_t best = 1;
  for (std::size_t i = 1; i < xs.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j)
      if (xs[j] > xs[i]) len[i] = std::max(len[i], len[j] + 1);
    best = std::max(best, len[i]);
  }
  return best;
}

std::vector<std::pair<double, uint32_t>> random_items(RandomStream& rng,
                                                      std::size_t n,
                                                      uint32_t max_lives) {
  std::vector<std::pair<double, uint32_t>> items(n);
  for (auto& [label, lives] : items) {
    label = rng.next_double();
    lives = 1 + static_cast<uint32_t>(rng.uniform_index(max_lives));
  }
  return items;
}

const std::vector<std::pair<double, uint32_t>> kSixItems = {
    {0.1, 2}, {0.8, 3}, {0.4, 1}, {0.2, 2}, {0.5, 2}, {0.15, 3}};

}  // namespace

TEST_CASE("six-item worked example: forest shape and root count") {
  const auto s = sort_items(kSixItems, true);
  CHECK(s.root_count() == 3);
  const auto& v = s.vertices();
  // Arrival order: .1, .8, .4, .2, .5, .15.
  CHECK(v[0].parent == kNoVertex);
  CHECK(v[1].parent == 0);  // .8 under .1
  CHECK(v[2].parent == 0);  // .4 under .1
  CHECK(v[3].parent == kNoVertex);
  CHECK(v[4].parent == 2);  // .5 under .4
  CHECK(v[5].parent == kNoVertex);
  // Life word by increasing label (.1 .15 .2 .4 .5 .8).
  CHECK(s.life_word() == std::vector<uint32_t>{0, 3, 2, 0, 2, 3});
  CHECK(s.leading_dead() == 1);
}

TEST_CASE("degenerate inputs") {
  SortState s;
  CHECK(s.root_count() == 0);
  CHECK(s.size() == 0);
  CHECK(sort_items({}).root_count() == 0);

  SortState one(true);
  one.insert(0.5, 3);
  CHECK(one.root_count() == 1);
  CHECK(one.leading_dead() == 0);
}

TEST_CASE("monotone label streams") {
  SortState inc;
  SortState dec(true);
  for (int i = 0; i < 50; ++i) {
    inc.insert(i, 1);
    dec.insert(-i, 1);
  }
  CHECK(inc.root_count() == 1);
  CHECK(dec.root_count() == 50);
  CHECK(dec.leading_dead() == 0);
}

TEST_CASE("single-life sorting equals patience stacks") {
  const std::vector<double> perm = {3, 6, 1, 7, 5, 4, 2};
  std::vector<std::pair<double, uint32_t>> items;
  for (double x : perm) items.push_back({x, 1});
  CHECK(sort_items(items).root_count() == 4);
  CHECK(longest_decreasing_subsequence(perm) == 4);
}

TEST_CASE("single-life root count is the LDS length, exhaustively to n = 7") {
  for (std::size_t n = 1; n <= 7; ++n) {
    std::vector<double> perm(n);
    std::iota(perm.begin(), perm.end(), 1.0);
    do {
      std::vector<std::pair<double, uint32_t>> items;
      for (double x : perm) items.push_back({x, 1});
      const auto rc = sort_items(items).root_count();
      CHECK(rc == longest_decreasing_subsequence(perm));
      CHECK(rc == lds_dp(perm));
    } while (std::next_permutation(perm.begin(), perm.end()));
  }
}

TEST_CASE("LDS against the quadratic reference on random input") {
  RandomStream rng(11, 0);
  for (int rep = 0; rep < 1000; ++rep) {
    const std::size_t n = 1 + rng.uniform_index(50);
    std::vector<double> xs(n);
    for (auto& x : xs) x = rng.next_double();
    CHECK(longest_decreasing_subsequence(xs) == lds_dp(xs));
  }
  CHECK(longest_decreasing_subsequence({}) == 0);
  CHECK(longest_decreasing_subsequence({1, 2, 3}) == 1);
}

TEST_CASE("insert rejects duplicates and zero lives") {
  SortState s;
  s.insert(0.5, 1);
  CHECK_THROWS_AS(s.insert(0.5, 2), std::invalid_argument);
  CHECK_THROWS_AS(s.insert(0.6, 0), std::invalid_argument);
  CHECK_THROWS_AS(s.insert_at(0.7, 1, 0.5), std::invalid_argument);
}

TEST_CASE("leading_dead needs opt-in tracking") {
  SortState s(false);
  s.insert(0.5, 1);
  CHECK_THROWS_AS(s.leading_dead(), std::logic_error);
}

TEST_CASE("leading dead count is exact on a hand-built configuration") {
  // Kill the two lowest labels, keep a higher one alive.
  SortState s(true);
  s.insert(0.1, 1);
  s.insert(0.2, 1);  // kills 0.1
  CHECK(s.leading_dead() == 1);
  s.insert(0.3, 2);  // kills 0.2
  CHECK(s.leading_dead() == 2);
  s.insert(0.05, 1);  // new lowest root, alive
  CHECK(s.leading_dead() == 0);
  s.insert(0.07, 1);  // kills 0.05
  CHECK(s.leading_dead() == 1);
}

TEST_CASE("mean leading-dead at n = 2 for the half/half table") {
  // Two arrival orders x lives in {1, 10}^2, all equally likely.
  double total = 0;
  int cases = 0;
  for (bool increasing : {true, false}) {
    for (uint32_t l1 : {1u, 10u}) {
      for (uint32_t l2 : {1u, 10u}) {
        SortState s(true);
        s.insert(increasing ? 0.3 : 0.7, l1);
        s.insert(increasing ? 0.7 : 0.3, l2);
        total += static_cast<double>(s.leading_dead());
        ++cases;
      }
    }
  }
  CHECK(total / cases == doctest::Approx(0.25));  // exactly 1/4
}

TEST_CASE("exact mean root count at n = 2") {
  double total = 0;
  for (bool increasing : {true, false}) {
    std::vector<std::pair<double, uint32_t>> items = {
        {increasing ? 0.3 : 0.7, 2}, {increasing ? 0.7 : 0.3, 2}};
    total += static_cast<double>(sort_items(items).root_count());
  }
  CHECK(total / 2 == doctest::Approx(1.5));
}

TEST_CASE("root-count increments match the leading-dead recursion") {
  // E[R(n+1)] - E[R(n)] = E[D_n + 1]/(n+1); paired Monte Carlo at n = 10.
  RandomStream rng(12, 0);
  const auto dist = OffspringDistribution::geometric(0.5);
  const int reps = 100000;
  const int n = 10;
  std::vector<double> paired(reps);
  for (int r = 0; r < reps; ++r) {
    SortState s(true);
    for (int i = 0; i < n; ++i) s.insert(rng.next_double(), dist.sample(rng));
    const double d = static_cast<double>(s.leading_dead());
    const auto before = s.root_count();
    s.insert(rng.next_double(), dist.sample(rng));
    const double delta = static_cast<double>(s.root_count() - before);
    paired[r] = delta - (d + 1.0) / (n + 1.0);
  }
  const auto mv = mean_var(paired);
  CHECK(std::fabs(mv.mean) < 3 * mv.std_error());
}

TEST_CASE("lean counter agrees with the reference sorter") {
  RandomStream rng(13, 0);
  const auto dist = OffspringDistribution::geometric(0.4);
  for (int rep = 0; rep < 300; ++rep) {
    const std::size_t n = 1 + rng.uniform_index(200);
    SortState ref(true);
    RootCounter lean(true);
    for (std::size_t i = 0; i < n; ++i) {
      const double label = rng.next_double();
      const uint32_t lives = dist.sample(rng);
      const auto out = ref.insert(label, lives);
      const bool root = lean.insert(label, lives);
      CHECK(root == out.created_root);
    }
    CHECK(lean.root_count() == ref.root_count());
    CHECK(lean.leading_dead() == ref.leading_dead());
  }
}

TEST_CASE("brute-force minimum equals the online sort") {
  const auto rc = sort_items(kSixItems).root_count();
  CHECK(min_heaps_bruteforce(kSixItems) == rc);

  RandomStream rng(14, 0);
  for (int rep = 0; rep < 300; ++rep) {
    const std::size_t n = 1 + rng.uniform_index(8);
    const auto items = random_items(rng, n, 3);
    CHECK(min_heaps_bruteforce(items) == sort_items(items).root_count());
  }
  CHECK(min_heaps_bruteforce({{0.5, 1}}) == 1);
  CHECK(min_heaps_bruteforce({}) == 0);
  CHECK_THROWS_AS(min_heaps_bruteforce(random_items(rng, 13, 2)),
                  std::invalid_argument);
}

TEST_CASE("life sweep: extra lives only ever save one root, absorbing") {
  CHECK(life_sweep({0.5}, {1}, 0, 4) == std::vector<uint64_t>{1, 1, 1, 1});

  RandomStream rng(15, 0);
  for (int rep = 0; rep < 1000; ++rep) {
    const std::size_t n = 2 + rng.uniform_index(11);
    std::vector<double> labels(n);
    std::vector<uint32_t> lives(n);
    for (std::size_t i = 0; i < n; ++i) {
      labels[i] = rng.next_double();
      lives[i] = 1 + static_cast<uint32_t>(rng.uniform_index(2));
    }
    const std::size_t i0 = rng.uniform_index(n);
    const auto counts = life_sweep(labels, lives, i0, 6);
    bool frozen = false;
    for (std::size_t m = 1; m < counts.size(); ++m) {
      const int64_t diff = static_cast<int64_t>(counts[m]) -
                           static_cast<int64_t>(counts[m - 1]);
      CHECK((diff == 0 || diff == -1));
      if (frozen) CHECK(diff == 0);
      if (diff == 0) frozen = true;
    }
  }
}

TEST_CASE("forest serialization is stable and complete") {
  const auto s = sort_items(kSixItems);
  const auto j1 = forest_to_json(s);
  const auto j2 = forest_to_json(sort_items(kSixItems));
  CHECK(j1 == j2);
  CHECK(j1.find("\"n\": 6") != std::string::npos);
  CHECK(j1.find("\"root_count\": 3") != std::string::npos);
  // Field order inside a vertex object is pinned.
  const auto id_pos = j1.find("\"id\"");
  const auto label_pos = j1.find("\"label\"");
  const auto init_pos = j1.find("\"initial_lives\"");
  const auto rem_pos = j1.find("\"remaining_lives\"");
  const auto par_pos = j1.find("\"parent\"");
  const auto arr_pos = j1.find("\"arrival_index\"");
  CHECK(id_pos < label_pos);
  CHECK(label_pos < init_pos);
  CHECK(init_pos < rem_pos);
  CHECK(rem_pos < par_pos);
  CHECK(par_pos < arr_pos);
  // Roots serialize with a null parent.
  CHECK(j1.find("\"parent\": null") != std::string::npos);
}
