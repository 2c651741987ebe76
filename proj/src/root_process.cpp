#include "heapforest/root_process.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace heapforest {

RootConfiguration::RootConfiguration(const std::vector<double>& heights,
                                     double t_max) {
  for (double h : heights) {
    if (!(h > 0.0 && h < t_max))
      throw std::invalid_argument("RootConfiguration: height outside (0, t_max)");
    insert(h);
  }
}

void RootConfiguration::insert(double h) {
  if (!heights_.insert(h).second)
    throw std::invalid_argument("RootConfiguration: duplicate height");
}

void RootConfiguration::erase_lowest_above(double s, uint32_t k) {
  auto it = heights_.upper_bound(s);
  while (k-- > 0 && it != heights_.end()) it = heights_.erase(it);
}

void RootConfiguration::erase_lowest(uint32_t k) {
  auto it = heights_.begin();
  while (k-- > 0 && it != heights_.end()) it = heights_.erase(it);
}

std::vector<double> RootConfiguration::heights() const {
  return {heights_.begin(), heights_.end()};
}

RootEvolution evolve(const RootConfiguration& sinks_init,
                     const std::vector<std::pair<double, uint32_t>>& sources,
                     const std::vector<Atom>& atoms, double x_max,
                     double t_max,
                     const std::vector<double>& checkpoint_xs) {
  for (const Atom& a : atoms) {
    if (!(a.label < 0.0))
      throw std::invalid_argument("evolve: atom label must be negative");
    if (!(a.time > 0.0 && a.time < t_max))
      throw std::invalid_argument("evolve: atom height outside (0, t_max)");
    if (a.lives == 0) throw std::invalid_argument("evolve: atom with 0 lives");
  }
  for (std::size_t i = 1; i < atoms.size(); ++i)
    if (!(atoms[i].label < atoms[i - 1].label))
      throw std::invalid_argument("evolve: atoms not sorted by decreasing label");
  for (const auto& [pos, lives] : sources) {
    if (!(pos < 0.0))
      throw std::invalid_argument("evolve: source position must be negative");
    if (lives == 0) throw std::invalid_argument("evolve: source with 0 lives");
  }
  for (std::size_t i = 1; i < sources.size(); ++i)
    if (!(sources[i].first < sources[i - 1].first))
      throw std::invalid_argument(
          "evolve: sources not sorted by decreasing position");
  for (double h : sinks_init.set())
    if (!(h > 0.0 && h < t_max))
      throw std::invalid_argument("evolve: initial height outside (0, t_max)");
  for (std::size_t i = 1; i < checkpoint_xs.size(); ++i)
    if (!(checkpoint_xs[i] > checkpoint_xs[i - 1]))
      throw std::invalid_argument("evolve: checkpoints not ascending");

  RootEvolution out;
  out.final_config = sinks_init;
  RootConfiguration& cfg = out.final_config;
  std::size_t ai = 0, si = 0, ci = 0;
  const auto flush_checkpoints = [&](double x) {
    while (ci < checkpoint_xs.size() && checkpoint_xs[ci] < x) {
      out.at_checkpoints.push_back(cfg);
      ++ci;
    }
  };
  while (true) {
    const double ax =
        ai < atoms.size() ? -atoms[ai].label
                          : std::numeric_limits<double>::infinity();
    const double sx =
        si < sources.size() ? -sources[si].first
                            : std::numeric_limits<double>::infinity();
    const double x = std::min(ax, sx);
    if (x > x_max || !std::isfinite(x)) break;
    flush_checkpoints(x);
    if (ax <= sx) {
      const Atom& a = atoms[ai++];
      cfg.insert(a.time);
      cfg.erase_lowest_above(a.time, a.lives);
    } else {
      cfg.erase_lowest(sources[si++].second);
    }
  }
  flush_checkpoints(std::numeric_limits<double>::infinity());
  return out;
}

DualityOutcome duality_check(double x_lo, double x_hi, double t_max,
                             const std::vector<Atom>& atoms,
                             const SourcesSinks& boundary) {
  const GraphicalRecord rec =
      simulate_atoms(x_lo, x_hi, t_max, atoms, boundary);

  // Dual scan runs by decreasing label; shift everything by x_hi so the
  // coordinates are negative as evolve expects.
  std::vector<Atom> dual = atoms;
  for (Atom& a : dual) a.label -= x_hi;
  std::sort(dual.begin(), dual.end(),
            [](const Atom& a, const Atom& b) { return a.label > b.label; });
  std::vector<std::pair<double, uint32_t>> dual_sources;
  for (auto it = boundary.sources.rbegin(); it != boundary.sources.rend(); ++it)
    dual_sources.emplace_back(it->first - x_hi, it->second);
  RootConfiguration init;
  for (double s : boundary.sinks) init.insert(s);

  // Sink times sit at t <= t_max; widen the height domain so they pass.
  const double t_dom = std::nextafter(
      t_max, std::numeric_limits<double>::infinity());
  const RootEvolution ev =
      evolve(init, dual_sources, dual, x_hi - x_lo + 1.0, t_dom);

  DualityOutcome out;
  out.forest_root_times = rec.root_events;
  // A sink that found nothing alive is a demand that exits on the left,
  // exactly like a root event; both survive the scan as heights.
  std::vector<double> expected = rec.root_events;
  for (const SinkEvent& e : rec.sink_events)
    if (e.affected == kNoVertex) expected.push_back(e.time);
  std::sort(expected.begin(), expected.end());
  out.dual_heights = ev.final_config.heights();
  out.match = expected == out.dual_heights;
  return out;
}

MonotoneBoundary::MonotoneBoundary(
    std::vector<std::pair<double, double>> steps, double a_f)
    : steps_(std::move(steps)), a_f_(a_f) {
  if (steps_.empty() || steps_.front().first != 0.0)
    throw std::invalid_argument("MonotoneBoundary: first step must start at 0");
  for (std::size_t i = 0; i < steps_.size(); ++i) {
    if (!(steps_[i].second >= 0.0))
      throw std::invalid_argument("MonotoneBoundary: negative value");
    if (i > 0 && !(steps_[i].first > steps_[i - 1].first &&
                   steps_[i].second >= steps_[i - 1].second))
      throw std::invalid_argument("MonotoneBoundary: steps not monotone");
  }
  if (!(a_f_ > steps_.back().first))
    throw std::invalid_argument("MonotoneBoundary: a_f inside the steps");
}

double MonotoneBoundary::value(double x) const {
  if (!(x >= 0.0)) throw std::invalid_argument("MonotoneBoundary: x < 0");
  if (x >= a_f_) return std::numeric_limits<double>::infinity();
  auto it = std::upper_bound(
      steps_.begin(), steps_.end(), x,
      [](double v, const std::pair<double, double>& s) { return v < s.first; });
  return std::prev(it)->second;
}

MonotoneBoundary MonotoneBoundary::lowest_majorant(
    const std::vector<std::pair<double, double>>& points, double a_f) {
  std::vector<std::pair<double, double>> sorted = points;
  std::sort(sorted.begin(), sorted.end());
  std::vector<std::pair<double, double>> steps{{0.0, 0.0}};
  double running = 0.0;
  for (const auto& [x, t] : sorted) {
    if (t <= running) continue;
    running = t;
    if (x <= 0.0)
      steps.front().second = running;
    else
      steps.emplace_back(x, running);
  }
  return MonotoneBoundary(std::move(steps), a_f);
}

std::vector<Atom> falling_map(const std::vector<Atom>& atoms,
                              const MonotoneBoundary& f) {
  std::vector<Atom> out;
  out.reserve(atoms.size());
  for (const Atom& a : atoms) {
    const double fx = f.value(a.label);
    if (!(a.time > fx))
      throw std::invalid_argument("falling_map: atom on or below the boundary");
    out.push_back({a.label, a.time - fx, a.lives});
  }
  return out;
}

}  // namespace heapforest
