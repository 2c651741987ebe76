#include "heapforest/geometric.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <stdexcept>

namespace heapforest {

RedBlueRecord simulate_redblue_atoms(double x_lo, double x_hi, double t_max,
                                     const std::vector<ColoredAtom>& atoms,
                                     const SourcesSinks& boundary,
                                     std::size_t checkpoint_every) {
  if (!(x_lo < x_hi))
    throw std::invalid_argument("simulate_redblue: x_lo >= x_hi");
  if (!(t_max >= 0.0)) throw std::invalid_argument("simulate_redblue: t_max < 0");
  if (checkpoint_every == 0) checkpoint_every = 1;
  double prev = 0.0;
  for (const ColoredAtom& a : atoms) {
    if (!(a.label >= x_lo && a.label <= x_hi))
      throw std::invalid_argument("simulate_redblue: atom outside the box");
    if (!(a.time > 0.0 && a.time <= t_max) || a.time < prev)
      throw std::invalid_argument("simulate_redblue: atoms not time-ordered");
    prev = a.time;
  }

  RedBlueRecord rec;
  rec.x_lo = x_lo;
  rec.x_hi = x_hi;
  rec.t_max = t_max;
  rec.atoms = atoms;
  rec.sink_times = boundary.sinks;
  rec.sink_red.assign(boundary.sinks.size(), true);
  for (std::size_t i = 0; i < boundary.sink_red.size(); ++i)
    rec.sink_red[i] = boundary.sink_red[i];

  std::set<double> alive;
  for (const auto& [label, lives] : boundary.sources) {
    (void)lives;  // the construction carries no lives
    rec.source_positions.push_back(label);
    if (!alive.insert(label).second)
      throw std::invalid_argument("simulate_redblue: duplicate source");
  }

  const auto snapshot = [&](double time, std::size_t ai, std::size_t si) {
    RedBlueRecord::Checkpoint cp;
    cp.time = time;
    cp.next_atom = ai;
    cp.next_sink = si;
    cp.positions.assign(alive.begin(), alive.end());
    rec.checkpoints_.push_back(std::move(cp));
  };
  snapshot(0.0, 0, 0);

  std::size_t ai = 0, si = 0, events = 0;
  while (ai < atoms.size() || si < rec.sink_times.size()) {
    const bool take_atom =
        si >= rec.sink_times.size() ||
        (ai < atoms.size() && atoms[ai].time <= rec.sink_times[si]);
    double now;
    if (take_atom) {
      const ColoredAtom& a = atoms[ai++];
      now = a.time;
      auto it = alive.lower_bound(a.label);
      if (it != alive.end() && *it == a.label)
        throw std::invalid_argument("simulate_redblue: duplicate atom label");
      if (it == alive.begin()) {
        rec.root_events.push_back(a.time);
        rec.horizontal_segments.push_back({a.time, x_lo, a.label, kNoVertex});
      } else {
        auto left = std::prev(it);
        rec.horizontal_segments.push_back({a.time, *left, a.label, kNoVertex});
        if (a.red) alive.erase(left);
      }
      alive.insert(a.label);
    } else {
      now = rec.sink_times[si];
      const bool red = rec.sink_red[si];
      ++si;
      if (!alive.empty()) {
        auto it = std::prev(alive.end());
        rec.horizontal_segments.push_back({now, *it, x_hi, kNoVertex});
        if (red) alive.erase(it);
      }
    }
    if (++events % checkpoint_every == 0) snapshot(now, ai, si);
  }
  rec.final_positions.assign(alive.begin(), alive.end());
  snapshot(t_max, ai, si);
  return rec;
}

std::vector<double> RedBlueRecord::positions_at(double t) const {
  if (!(t >= 0.0 && t <= t_max))
    throw std::invalid_argument("positions_at: t outside [0, t_max]");
  std::size_t lo = 0, hi = checkpoints_.size();
  while (hi - lo > 1) {
    const std::size_t mid = (lo + hi) / 2;
    if (checkpoints_[mid].time <= t)
      lo = mid;
    else
      hi = mid;
  }
  const Checkpoint& cp = checkpoints_[lo];
  std::set<double> alive(cp.positions.begin(), cp.positions.end());
  std::size_t ai = cp.next_atom, si = cp.next_sink;
  while (true) {
    const bool atom_ok = ai < atoms.size() && atoms[ai].time <= t;
    const bool sink_ok = si < sink_times.size() && sink_times[si] <= t;
    if (!atom_ok && !sink_ok) break;
    if (atom_ok && (!sink_ok || atoms[ai].time <= sink_times[si])) {
      const ColoredAtom& a = atoms[ai++];
      auto it = alive.lower_bound(a.label);
      if (a.red && it != alive.begin()) alive.erase(std::prev(it));
      alive.insert(a.label);
    } else {
      const bool red = sink_red[si];
      ++si;
      if (red && !alive.empty()) alive.erase(std::prev(alive.end()));
    }
  }
  return {alive.begin(), alive.end()};
}

RedBlueRecord simulate_redblue(double x_lo, double x_hi, double t_max,
                               double alpha, const SourcesSinks& boundary,
                               RandomStream& rng,
                               std::size_t checkpoint_every) {
  if (!(alpha > 0.0 && alpha <= 1.0))
    throw std::invalid_argument("simulate_redblue: alpha outside (0, 1]");
  const auto plain =
      sample_marked_ppp(x_lo, x_hi, t_max, OffspringDistribution::dirac(1), rng);
  std::vector<ColoredAtom> atoms;
  atoms.reserve(plain.size());
  for (const Atom& a : plain)
    atoms.push_back({a.label, a.time, rng.next_double() < alpha});
  return simulate_redblue_atoms(x_lo, x_hi, t_max, atoms, boundary,
                                checkpoint_every);
}

namespace {

struct Particle {
  uint32_t lives = 1;
  bool marked = false;
};

struct TaggedAttempt {
  bool ok = false;
  TaggedTrajectory traj;
};

TaggedAttempt run_tagged_attempt(
    double w_left, double w_right, uint32_t m_gaps,
    const std::vector<Atom>& atoms,
    const std::vector<std::pair<double, uint32_t>>& sources,
    const std::vector<double>& sinks, const std::vector<double>& sample_times) {
  TaggedAttempt out;
  out.traj.window_lo = -w_left;
  out.traj.window_hi = w_right;

  std::map<double, Particle> alive;
  std::set<double> marked_alive;
  double tagged_pos = 0.0;
  bool found_tag = false;
  for (const auto& [label, lives] : sources) {
    alive.emplace(label, Particle{lives, false});
    if (!found_tag && label >= 0.0) {
      found_tag = true;
      tagged_pos = label;
    }
  }
  if (!found_tag)
    throw std::runtime_error(
        "track_tagged_particle: no source at or right of 0");
  alive[tagged_pos].marked = true;
  marked_alive.insert(tagged_pos);
  out.traj.start_position = tagged_pos;

  const auto kill_one = [&](std::map<double, Particle>::iterator it) {
    if (--it->second.lives == 0) {
      if (it->second.marked) marked_alive.erase(it->first);
      alive.erase(it);
    }
  };

  std::size_t ai = 0, si = 0;
  const double margin = 2.0 * (w_left / 10.0) + 1.0;
  for (double ts : sample_times) {
    while (true) {
      const bool atom_ok = ai < atoms.size() && atoms[ai].time <= ts;
      const bool sink_ok = si < sinks.size() && sinks[si] <= ts;
      if (!atom_ok && !sink_ok) break;
      if (atom_ok && (!sink_ok || atoms[ai].time <= sinks[si])) {
        const Atom& a = atoms[ai++];
        bool marked = false;
        auto it = alive.lower_bound(a.label);
        if (it != alive.begin()) {
          auto father = std::prev(it);
          marked = father->second.marked;
          kill_one(father);
        }
        alive.emplace(a.label, Particle{a.lives, marked});
        if (marked) marked_alive.insert(a.label);
      } else {
        ++si;
        if (!alive.empty()) kill_one(std::prev(alive.end()));
      }
    }
    if (marked_alive.empty()) return out;  // tree fell outside: widen
    const double x = *marked_alive.begin();
    auto it = alive.upper_bound(x);
    std::vector<double> gaps;
    gaps.reserve(m_gaps);
    double prev = x;
    for (uint32_t k = 0; k < m_gaps; ++k, ++it) {
      if (it == alive.end()) return out;
      gaps.push_back(it->first - prev);
      prev = it->first;
    }
    if (prev > w_right - margin || x > w_right - margin) return out;
    out.traj.times.push_back(ts);
    out.traj.x.push_back(x);
    out.traj.gaps.push_back(std::move(gaps));
  }
  out.ok = true;
  return out;
}

}  // namespace

TaggedTrajectory track_tagged_particle(double lambda, double alpha,
                                       double t_max, double window_width,
                                       uint32_t m_gaps, RandomStream& rng,
                                       const std::vector<double>& sample_times) {
  if (!(lambda > 0.0))
    throw std::invalid_argument("track_tagged_particle: lambda must be > 0");
  if (!(alpha > 0.0 && alpha <= 1.0))
    throw std::invalid_argument("track_tagged_particle: alpha outside (0, 1]");
  if (!(t_max > 0.0) || m_gaps == 0)
    throw std::invalid_argument("track_tagged_particle: bad t_max or m_gaps");
  for (std::size_t i = 0; i < sample_times.size(); ++i) {
    if (!(sample_times[i] >= 0.0 && sample_times[i] <= t_max))
      throw std::invalid_argument("track_tagged_particle: sample time outside range");
    if (i > 0 && !(sample_times[i] > sample_times[i - 1]))
      throw std::invalid_argument("track_tagged_particle: sample times not ascending");
  }
  const double w_left =
      alpha < 1.0 ? 10.0 * alpha / (lambda * (1.0 - alpha)) : 10.0 / lambda;
  double w_right = std::max(window_width, (m_gaps + 5.0) / lambda);

  const OffspringDistribution lives_dist =
      alpha < 1.0 ? OffspringDistribution::geometric(alpha)
                  : OffspringDistribution::dirac(1);

  // Core realization on [-w_left, w_right]; expansions append strip
  // sources/atoms and redraw the right-edge sinks, then replay.
  std::vector<std::pair<double, uint32_t>> sources;
  std::vector<Atom> atoms;
  double covered_hi = -w_left;
  const auto extend_to = [&](double new_hi) {
    const uint64_t n_src = rng.poisson(lambda * (new_hi - covered_hi));
    std::vector<double> xs(n_src);
    for (double& v : xs) v = rng.uniform(covered_hi, new_hi);
    std::sort(xs.begin(), xs.end());
    for (double v : xs) sources.emplace_back(v, rng.geometric(alpha));
    std::sort(sources.begin(), sources.end());
    auto strip = sample_marked_ppp(covered_hi, new_hi, t_max, lives_dist, rng);
    std::vector<Atom> merged(atoms.size() + strip.size());
    std::merge(atoms.begin(), atoms.end(), strip.begin(), strip.end(),
               merged.begin(), [](const Atom& a, const Atom& b) {
                 return a.time < b.time;
               });
    atoms = std::move(merged);
    covered_hi = new_hi;
  };
  extend_to(w_right);
  // The tagged vertex is the first source at or right of 0; widen until one
  // exists (a window of width w misses with probability e^{-lambda w}).
  for (uint32_t grow = 0; sources.empty() || sources.back().first < 0.0;
       ++grow) {
    if (grow >= 64)
      throw std::runtime_error("track_tagged_particle: no source found");
    w_right = 1.5 * w_right + 5.0;
    extend_to(w_right);
  }

  for (uint32_t attempt = 0;; ++attempt) {
    const std::vector<double> sinks =
        sample_sink_process(lambda, alpha, t_max, rng);
    TaggedAttempt res = run_tagged_attempt(w_left, w_right, m_gaps, atoms,
                                           sources, sinks, sample_times);
    if (res.ok) {
      res.traj.expansions = attempt;
      return res.traj;
    }
    if (attempt >= 12)
      throw std::runtime_error("track_tagged_particle: window kept growing");
    w_right = 1.5 * w_right + 5.0;
    extend_to(w_right);
  }
}

std::string trajectory_to_csv(const TaggedTrajectory& traj) {
  std::string out = "t,x";
  const std::size_t m = traj.gaps.empty() ? 0 : traj.gaps.front().size();
  char buf[64];
  for (std::size_t k = 1; k <= m; ++k) {
    std::snprintf(buf, sizeof buf, ",gap_%zu", k);
    out += buf;
  }
  out += "\n";
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", traj.times[i]);
    out += buf;
    std::snprintf(buf, sizeof buf, ",%.17g", traj.x[i]);
    out += buf;
    for (double g : traj.gaps[i]) {
      std::snprintf(buf, sizeof buf, ",%.17g", g);
      out += buf;
    }
    out += "\n";
  }
  return out;
}

uint64_t count_crossing_trees(double lambda, double alpha, double t_max,
                              double w, double w_right, RandomStream& rng) {
  if (!(lambda > 0.0) || !(alpha > 0.0 && alpha <= 1.0) || !(w > 0.0) ||
      !(w_right > 0.0) || !(t_max > 0.0))
    throw std::invalid_argument("count_crossing_trees: bad parameters");
  struct P {
    uint32_t lives;
    uint32_t root;  // index into root bookkeeping
  };
  std::map<double, P> alive;
  std::vector<bool> root_counts;  // root position in [-w, 0)?
  std::set<uint32_t> crossing;

  const uint64_t n_src = rng.poisson(lambda * (w + w_right));
  std::vector<double> xs(n_src);
  for (double& v : xs) v = rng.uniform(-w, w_right);
  std::sort(xs.begin(), xs.end());
  for (double v : xs) {
    const uint32_t id = static_cast<uint32_t>(root_counts.size());
    root_counts.push_back(v >= -w && v < 0.0);
    alive.emplace(v, P{rng.geometric(alpha), id});
  }
  const OffspringDistribution lives_dist =
      alpha < 1.0 ? OffspringDistribution::geometric(alpha)
                  : OffspringDistribution::dirac(1);
  const auto atoms = sample_marked_ppp(-w, w_right, t_max, lives_dist, rng);
  const auto sinks = sample_sink_process(lambda, alpha, t_max, rng);

  std::size_t ai = 0, si = 0;
  while (ai < atoms.size() || si < sinks.size()) {
    const bool take_atom =
        si >= sinks.size() || (ai < atoms.size() && atoms[ai].time <= sinks[si]);
    if (take_atom) {
      const Atom& a = atoms[ai++];
      uint32_t root;
      auto it = alive.lower_bound(a.label);
      if (it == alive.begin()) {
        root = static_cast<uint32_t>(root_counts.size());
        root_counts.push_back(a.label >= -w && a.label < 0.0);
      } else {
        auto father = std::prev(it);
        root = father->second.root;
        if (--father->second.lives == 0) alive.erase(father);
      }
      if (a.label >= 0.0 && root_counts[root]) crossing.insert(root);
      alive.emplace(a.label, P{a.lives, root});
    } else {
      ++si;
      if (!alive.empty()) {
        auto it = std::prev(alive.end());
        if (--it->second.lives == 0) alive.erase(it);
      }
    }
  }
  return crossing.size();
}

}  // namespace heapforest
