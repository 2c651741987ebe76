#include <cinttypes>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "heapforest/experiments.hpp"
#include "heapforest/geometric.hpp"
#include "heapforest/hammersley.hpp"
#include "heapforest/heap_sort.hpp"
#include "heapforest/manifest.hpp"
#include "heapforest/random.hpp"
#include "heapforest/svg.hpp"

namespace {

using namespace heapforest;

std::string read_file(const std::string& path) {
  if (path == "-") {
    std::ostringstream ss;
    ss << std::cin.rdbuf();
    return ss.str();
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << content;
  if (!out) throw std::runtime_error("write failed: " + path);
}

void emit(const std::string& out_path, const std::string& content) {
  if (out_path.empty())
    std::fwrite(content.data(), 1, content.size(), stdout);
  else
    write_file(out_path, content);
}

uint64_t resolve_seed(const CLI::Option* opt, uint64_t value) {
  if (opt->count() > 0) return value;
  std::random_device rd;
  const uint64_t drawn = (static_cast<uint64_t>(rd()) << 32) ^ rd();
  std::fprintf(stderr, "seed drawn from entropy: %" PRIu64 "\n", drawn);
  return drawn;
}

// One item per line, "label" or "label,lives"; blank lines and lines
// starting with '#' are skipped.
std::vector<std::pair<double, uint32_t>> parse_items(
    const std::string& text, const OffspringDistribution* dist,
    RandomStream* rng) {
  std::vector<std::pair<double, uint32_t>> items;
  std::istringstream in(text);
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::size_t a = raw.find_first_not_of(" \t\r");
    if (a == std::string::npos || raw[a] == '#') continue;
    std::size_t b = raw.find_last_not_of(" \t\r");
    const std::string line = raw.substr(a, b - a + 1);
    const std::string where = "line " + std::to_string(line_no);
    const std::size_t comma = line.find(',');
    const std::string label_text = line.substr(0, comma);
    std::size_t used = 0;
    double label = 0.0;
    try {
      label = std::stod(label_text, &used);
    } catch (const std::exception&) {
      throw std::runtime_error(where + ": bad label '" + label_text + "'");
    }
    while (used < label_text.size() &&
           (label_text[used] == ' ' || label_text[used] == '\t'))
      ++used;
    if (used != label_text.size())
      throw std::runtime_error(where + ": bad label '" + label_text + "'");
    uint32_t lives = 0;
    if (comma != std::string::npos) {
      const std::string lives_text = line.substr(comma + 1);
      try {
        std::size_t lused = 0;
        const long long v = std::stoll(lives_text, &lused);
        while (lused < lives_text.size() &&
               (lives_text[lused] == ' ' || lives_text[lused] == '\t'))
          ++lused;
        if (lused != lives_text.size() || v < 1 || v > 0xffffffffLL)
          throw std::runtime_error("");
        lives = static_cast<uint32_t>(v);
      } catch (const std::exception&) {
        throw std::runtime_error(where + ": bad lives '" + lives_text +
                                 "' (need an integer >= 1)");
      }
    } else {
      if (dist == nullptr)
        throw std::runtime_error(where +
                                 ": no lives given and no --dist to draw "
                                 "them from");
      lives = dist->sample(*rng);
    }
    items.emplace_back(label, lives);
  }
  for (std::size_t i = 0; i < items.size(); ++i)
    for (std::size_t j = i + 1; j < items.size(); ++j)
      if (items[i].first == items[j].first)
        throw std::runtime_error("duplicate label " +
                                 std::to_string(items[i].first));
  return items;
}

int cmd_sort(const std::string& input, const std::string& dist_spec,
             const CLI::Option* seed_opt, uint64_t seed,
             const std::string& out_path) {
  const std::string text = read_file(input);
  std::vector<std::pair<double, uint32_t>> items;
  if (!dist_spec.empty()) {
    const OffspringDistribution dist = OffspringDistribution::parse(dist_spec);
    RandomStream rng(resolve_seed(seed_opt, seed), hash64("cmd_sort", 0));
    items = parse_items(text, &dist, &rng);
  } else {
    items = parse_items(text, nullptr, nullptr);
  }
  const SortState state = sort_items(items);
  std::printf("%" PRIu64 "\n", state.root_count());
  if (!out_path.empty()) write_file(out_path, forest_to_json(state));
  return 0;
}

int cmd_simulate(double t_max, const std::string& dist_spec,
                 const CLI::Option* lambda_opt, double lambda, double alpha,
                 double eps_trunc, const CLI::Option* seed_opt, uint64_t seed,
                 const std::string& format, const std::string& out_path) {
  if (!(t_max > 0.0)) throw std::runtime_error("--t must be > 0");
  RandomStream rng(resolve_seed(seed_opt, seed), hash64("cmd_simulate", 0));
  GraphicalRecord record;
  if (lambda_opt->count() > 0) {
    if (!(alpha > 0.0 && alpha <= 1.0))
      throw std::runtime_error("stationary mode needs --alpha in (0, 1]");
    const SourcesSinks boundary =
        stationary_boundary(0.0, 1.0, lambda, alpha, t_max, rng, eps_trunc);
    const OffspringDistribution lives =
        alpha < 1.0 ? OffspringDistribution::geometric(alpha)
                    : OffspringDistribution::dirac(1);
    record = simulate(0.0, 1.0, t_max, lives, boundary, rng);
  } else {
    if (dist_spec.empty())
      throw std::runtime_error("need --dist (or --lambda with --alpha)");
    const OffspringDistribution dist = OffspringDistribution::parse(dist_spec);
    record = simulate(0.0, 1.0, t_max, dist, SourcesSinks{}, rng);
  }
  if (format == "svg")
    emit(out_path, render_svg(record));
  else if (format == "json")
    emit(out_path, record_to_json(record));
  else
    throw std::runtime_error("simulate writes json or svg, not " + format);
  return 0;
}

int cmd_roots(const std::string& record_path, const CLI::Option* n_opt,
              uint64_t n, const std::string& dist_spec,
              const CLI::Option* seed_opt, uint64_t seed,
              const std::string& format, const std::string& out_path) {
  std::vector<double> times;
  std::vector<uint64_t> counts;
  if (n_opt->count() > 0) {
    if (dist_spec.empty()) throw std::runtime_error("--n needs --dist");
    const OffspringDistribution dist = OffspringDistribution::parse(dist_spec);
    RandomStream rng(resolve_seed(seed_opt, seed), hash64("cmd_roots", 0));
    const BridgeResult bridge = poissonized_bridge(n, dist, rng);
    times = bridge.arrival_times;
    counts = bridge.root_counts;
  } else {
    if (record_path.empty())
      throw std::runtime_error("need a record file or --n with --dist");
    const GraphicalRecord record = record_from_json(read_file(record_path));
    const RootCountingProcess proc = root_counting_process(record);
    times = proc.jump_times;
    counts.resize(times.size());
    for (std::size_t i = 0; i < times.size(); ++i) counts[i] = i + 1;
  }
  if (format == "csv") {
    std::string out = "t,roots\n";
    char buf[64];
    for (std::size_t i = 0; i < times.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.17g,%" PRIu64 "\n", times[i],
                    counts[i]);
      out += buf;
    }
    emit(out_path, out);
  } else if (format == "json") {
    nlohmann::ordered_json j;
    j["times"] = times;
    j["root_counts"] = counts;
    emit(out_path, j.dump(2) + "\n");
  } else {
    throw std::runtime_error("roots writes json or csv, not " + format);
  }
  return 0;
}

int cmd_experiment(const std::string& manifest_path,
                   const CLI::Option* seed_opt, uint64_t seed,
                   const CLI::Option* jobs_opt, int jobs,
                   const std::string& format, const std::string& out_path) {
  const Manifest manifest = Manifest::load(manifest_path);
  RunOverrides overrides;
  if (seed_opt->count() > 0) {
    overrides.has_seed = true;
    overrides.seed = seed;
  } else if (!manifest.has("seed")) {
    overrides.has_seed = true;
    overrides.seed = resolve_seed(seed_opt, seed);
  }
  if (jobs_opt->count() > 0) overrides.jobs = jobs;
  const EstimateReport report = run_experiment(manifest, overrides);
  const std::string json = report_to_json(report);
  if (format == "csv")
    emit(out_path, report_to_csv(report));
  else
    emit(out_path, json);
  if (manifest.has("out") && manifest.get("out") != out_path)
    write_file(manifest.get("out"), json);
  if (manifest.has("csv")) write_file(manifest.get("csv"), report_to_csv(report));
  std::fprintf(stderr, "experiment %s: %s in %.2f s\n",
               report.experiment.c_str(), report.pass ? "PASS" : "FAIL",
               report.wall_seconds);
  return report.pass ? 0 : 2;
}

int cmd_render(const std::string& record_path, bool color_trees,
               bool hide_lives, const std::string& out_path) {
  const GraphicalRecord record = record_from_json(read_file(record_path));
  RenderOptions options;
  options.color_trees = color_trees;
  options.show_lives = !hide_lives;
  emit(out_path, render_svg(record, options));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Heap patience sorting and tree-process simulation toolkit"};
  app.require_subcommand(1);

  uint64_t seed = 0;
  int jobs = 0;
  uint64_t n = 0;
  double t_max = 1.0, lambda = 0.0, alpha = 0.0, eps_trunc = 0.0;
  std::string out_path, format = "json", dist_spec, input_path;
  std::string manifest_path, record_path;
  bool color_trees = false, hide_lives = false;

  CLI::App* sort = app.add_subcommand(
      "sort", "Sort a file of label[,lives] lines, print the root count");
  sort->add_option("input", input_path, "input file, or - for stdin")
      ->required();
  sort->add_option("--dist", dist_spec,
                   "lives distribution for labels-only input "
                   "(dirac:K | geom:A | table:V=P,...)");
  const CLI::Option* sort_seed = sort->add_option("--seed", seed);
  sort->add_option("--out", out_path, "write the forest JSON here");

  CLI::App* simulate = app.add_subcommand(
      "simulate", "Run the particle system on [0,1] x [0,t]");
  simulate->add_option("--t", t_max, "time horizon")->required();
  simulate->add_option("--dist", dist_spec, "lives distribution");
  const CLI::Option* sim_lambda = simulate->add_option(
      "--lambda", lambda, "stationary mode: source intensity");
  simulate->add_option("--alpha", alpha,
                       "stationary mode: geometric lives parameter");
  simulate->add_option("--eps-trunc", eps_trunc,
                       "sink truncation when lambda = 0");
  const CLI::Option* sim_seed = simulate->add_option("--seed", seed);
  simulate->add_option("--format", format)
      ->check(CLI::IsMember({"json", "svg"}));
  simulate->add_option("--out", out_path, "output path (default stdout)");

  CLI::App* roots = app.add_subcommand(
      "roots", "Root-counting process of a record, or a fresh n-item run");
  roots->add_option("record", record_path, "record JSON file");
  const CLI::Option* roots_n =
      roots->add_option("--n", n, "draw n items instead of reading a record");
  roots->add_option("--dist", dist_spec, "lives distribution for --n");
  const CLI::Option* roots_seed = roots->add_option("--seed", seed);
  roots->add_option("--format", format)
      ->check(CLI::IsMember({"json", "csv"}));
  roots->add_option("--out", out_path, "output path (default stdout)");

  CLI::App* experiment =
      app.add_subcommand("experiment", "Run a manifest-driven experiment");
  experiment->add_option("--manifest", manifest_path)->required();
  const CLI::Option* exp_seed =
      experiment->add_option("--seed", seed, "override the manifest seed");
  const CLI::Option* exp_jobs =
      experiment->add_option("--jobs", jobs, "replica parallelism");
  experiment->add_option("--format", format)
      ->check(CLI::IsMember({"json", "csv"}));
  experiment->add_option("--out", out_path, "report path (default stdout)");

  CLI::App* render =
      app.add_subcommand("render", "Render a record JSON to SVG");
  render->add_option("record", record_path)->required();
  render->add_flag("--color-trees", color_trees,
                   "alternate two colors over the trees");
  render->add_flag("--no-lives", hide_lives, "omit the lives captions");
  render->add_option("--out", out_path, "output path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (sort->parsed())
      return cmd_sort(input_path, dist_spec, sort_seed, seed, out_path);
    if (simulate->parsed())
      return cmd_simulate(t_max, dist_spec, sim_lambda, lambda, alpha,
                          eps_trunc, sim_seed, seed, format, out_path);
    if (roots->parsed())
      return cmd_roots(record_path, roots_n, n, dist_spec, roots_seed, seed,
                       format, out_path);
    if (experiment->parsed())
      return cmd_experiment(manifest_path, exp_seed, seed, exp_jobs, jobs,
                            format, out_path);
    if (render->parsed())
      return cmd_render(record_path, color_trees, hide_lives, out_path);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 1;
}
