#include <chrono>
#include <cinttypes>
#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "heapforest/distributions.hpp"
#include "heapforest/experiments.hpp"
#include "heapforest/heap_sort.hpp"
#include "heapforest/random.hpp"

using namespace heapforest;

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Throughput of the counting kernel vs the reference sorter, "
               "and of the replica fan-out"};
  uint64_t items = 10'000'000;
  uint64_t reference_items = 1'000'000;
  uint64_t replicas = 64;
  uint64_t per_replica = 200'000;
  int jobs = 2;
  uint64_t seed = 20260819;
  std::string dist_spec = "geom:0.5";
  app.add_option("--items", items, "insertions for the kernel timing");
  app.add_option("--reference-items", reference_items,
                 "insertions for the reference sorter timing");
  app.add_option("--replicas", replicas);
  app.add_option("--per-replica", per_replica, "insertions per replica");
  app.add_option("--jobs", jobs, "threads for the parallel pass");
  app.add_option("--seed", seed);
  app.add_option("--dist", dist_spec);
  CLI11_PARSE(app, argc, argv);

  const OffspringDistribution dist = OffspringDistribution::parse(dist_spec);

  {
    std::printf("== counting kernel vs reference sorter ==\n");
    RandomStream rng(seed, hash64("bench/kernel", 0));
    std::vector<std::pair<double, uint32_t>> data(items);
    for (auto& [label, lives] : data) {
      label = rng.next_double();
      lives = dist.sample(rng);
    }
    auto t0 = std::chrono::steady_clock::now();
    RootCounter kernel;
    for (const auto& [label, lives] : data) kernel.insert(label, lives);
    const double kernel_s = seconds_since(t0);
    std::printf("kernel    : %10" PRIu64 " items  %7.3f s  %8.2f M/s"
                "  roots = %" PRIu64 "\n",
                items, kernel_s, static_cast<double>(items) / kernel_s / 1e6,
                kernel.root_count());

    const uint64_t m = std::min(reference_items, items);
    t0 = std::chrono::steady_clock::now();
    SortState reference;
    for (uint64_t i = 0; i < m; ++i)
      reference.insert(data[i].first, data[i].second);
    const double ref_s = seconds_since(t0);
    RootCounter check;
    for (uint64_t i = 0; i < m; ++i)
      check.insert(data[i].first, data[i].second);
    std::printf("reference : %10" PRIu64 " items  %7.3f s  %8.2f M/s"
                "  roots = %" PRIu64 " (%s)\n",
                m, ref_s, static_cast<double>(m) / ref_s / 1e6,
                reference.root_count(),
                reference.root_count() == check.root_count() ? "agree"
                                                             : "MISMATCH");
  }

  {
    std::printf("== replica fan-out, serial vs %d threads ==\n", jobs);
    const auto run = [&](int j, std::vector<uint64_t>& out) {
      out.assign(replicas, 0);
      const auto t0 = std::chrono::steady_clock::now();
      parallel_replicas(replicas, j, [&](uint64_t r) {
        RandomStream rng(seed, hash64("bench/fanout", r));
        RootCounter counter;
        for (uint64_t i = 0; i < per_replica; ++i)
          counter.insert(rng.next_double(), dist.sample(rng));
        out[r] = counter.root_count();
      });
      return seconds_since(t0);
    };
    std::vector<uint64_t> serial, parallel;
    const double s1 = run(1, serial);
    const double sj = run(jobs, parallel);
    const bool equal = serial == parallel;
    std::printf("serial    : %7.3f s\n", s1);
    std::printf("%2d threads: %7.3f s  speedup %.2fx  results %s\n", jobs, sj,
                s1 / sj, equal ? "identical" : "DIFFER");
    if (!equal) return 1;
  }
  return 0;
}
