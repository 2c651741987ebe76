#include "heapforest/hammersley.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace heapforest {

namespace {

void check_boundary(double x_lo, double x_hi, double t_max,
                    const SourcesSinks& boundary) {
  if (!(x_lo < x_hi)) throw std::invalid_argument("simulate: x_lo >= x_hi");
  if (!(t_max >= 0.0)) throw std::invalid_argument("simulate: t_max < 0");
  double prev = -std::numeric_limits<double>::infinity();
  for (const auto& [label, lives] : boundary.sources) {
    if (lives == 0) throw std::invalid_argument("simulate: source with 0 lives");
    if (!(label >= x_lo && label <= x_hi))
      throw std::invalid_argument("simulate: source label outside the box");
    if (!(label > prev))
      throw std::invalid_argument("simulate: sources not sorted and distinct");
    prev = label;
  }
  prev = 0.0;
  for (double s : boundary.sinks) {
    if (!(s > prev)) throw std::invalid_argument("simulate: sinks not ascending");
    if (!(s <= t_max)) throw std::invalid_argument("simulate: sink after t_max");
    prev = s;
  }
  if (!boundary.sink_red.empty() &&
      boundary.sink_red.size() != boundary.sinks.size())
    throw std::invalid_argument("simulate: sink_red size mismatch");
}

}  // namespace

GraphicalRecord simulate_atoms(double x_lo, double x_hi, double t_max,
                               const std::vector<Atom>& atoms,
                               const SourcesSinks& boundary,
                               std::size_t checkpoint_every) {
  check_boundary(x_lo, x_hi, t_max, boundary);
  if (checkpoint_every == 0) checkpoint_every = 1;
  double prev_t = 0.0;
  for (const Atom& a : atoms) {
    if (a.lives == 0) throw std::invalid_argument("simulate: atom with 0 lives");
    if (!(a.label >= x_lo && a.label <= x_hi))
      throw std::invalid_argument("simulate: atom label outside the box");
    if (!(a.time > 0.0 && a.time <= t_max))
      throw std::invalid_argument("simulate: atom time outside (0, t_max]");
    if (a.time < prev_t)
      throw std::invalid_argument("simulate: atoms not time-ordered");
    prev_t = a.time;
  }

  GraphicalRecord rec;
  rec.x_lo = x_lo;
  rec.x_hi = x_hi;
  rec.t_max = t_max;
  rec.atoms = atoms;
  rec.sources = boundary.sources;

  std::map<double, uint32_t> alive;  // label -> vertex id
  auto& verts = rec.vertices;
  verts.reserve(boundary.sources.size() + atoms.size());
  for (const auto& [label, lives] : boundary.sources) {
    VertexRecord v;
    v.label = label;
    v.initial_lives = v.remaining_lives = lives;
    v.arrival_index = static_cast<uint32_t>(verts.size());
    alive.emplace(label, v.arrival_index);
    verts.push_back(std::move(v));
  }

  const auto snapshot = [&](double time, std::size_t ai, std::size_t si) {
    GraphicalRecord::Checkpoint cp;
    cp.time = time;
    cp.next_atom = ai;
    cp.next_sink = si;
    cp.alive.reserve(alive.size());
    for (const auto& [label, id] : alive)
      cp.alive.push_back({label, verts[id].remaining_lives});
    rec.checkpoints_.push_back(std::move(cp));
  };
  snapshot(0.0, 0, 0);

  std::size_t ai = 0, si = 0, events = 0;
  while (ai < atoms.size() || si < boundary.sinks.size()) {
    const bool take_atom =
        si >= boundary.sinks.size() ||
        (ai < atoms.size() && atoms[ai].time <= boundary.sinks[si]);
    double now;
    if (take_atom) {
      const Atom& a = atoms[ai++];
      now = a.time;
      VertexRecord v;
      v.label = a.label;
      v.initial_lives = v.remaining_lives = a.lives;
      v.arrival_index = static_cast<uint32_t>(verts.size());
      v.birth_time = a.time;
      const uint32_t id = v.arrival_index;
      auto it = alive.lower_bound(a.label);
      if (it != alive.end() && it->first == a.label)
        throw std::invalid_argument("simulate: duplicate atom label");
      if (it == alive.begin()) {
        rec.root_events.push_back(a.time);
        rec.horizontal_segments.push_back({a.time, x_lo, a.label, id});
      } else {
        --it;
        VertexRecord& f = verts[it->second];
        v.parent = it->second;
        f.children.push_back(id);
        rec.horizontal_segments.push_back({a.time, f.label, a.label, id});
        if (--f.remaining_lives == 0) {
          f.death_time = a.time;
          f.killer = id;
          alive.erase(it);
        }
      }
      alive.emplace(a.label, id);
      verts.push_back(std::move(v));
    } else {
      const double s = boundary.sinks[si++];
      now = s;
      if (alive.empty()) {
        rec.sink_events.push_back({s, kNoVertex});
      } else {
        auto it = std::prev(alive.end());
        VertexRecord& p = verts[it->second];
        rec.sink_events.push_back({s, it->second});
        rec.horizontal_segments.push_back({s, p.label, x_hi, kNoVertex});
        if (--p.remaining_lives == 0) {
          p.death_time = s;
          alive.erase(it);
        }
      }
    }
    if (++events % checkpoint_every == 0) snapshot(now, ai, si);
  }
  snapshot(t_max, ai, si);

  rec.vertical_segments.reserve(verts.size());
  for (const VertexRecord& v : verts) {
    const bool dies = v.death_time != kNeverDies;
    rec.vertical_segments.push_back(
        {v.label, v.birth_time, dies ? v.death_time : t_max,
         v.arrival_index, dies});
  }
  return rec;
}

std::vector<ParticleState> GraphicalRecord::configuration_at(double t) const {
  if (!(t >= 0.0 && t <= t_max))
    throw std::invalid_argument("configuration_at: t outside [0, t_max]");
  // Last checkpoint at or before t; every event up to the checkpoint's time
  // (atoms first on ties, matching the forward pass) is already applied.
  std::size_t lo = 0, hi = checkpoints_.size();
  while (hi - lo > 1) {
    const std::size_t mid = (lo + hi) / 2;
    if (checkpoints_[mid].time <= t)
      lo = mid;
    else
      hi = mid;
  }
  const Checkpoint& cp = checkpoints_[lo];
  std::map<double, uint32_t> alive;
  for (const ParticleState& p : cp.alive) alive.emplace(p.label, p.remaining);
  std::size_t ai = cp.next_atom, si = cp.next_sink;
  // Sink times are recoverable from the event log.
  std::vector<double> sink_times;
  sink_times.reserve(sink_events.size());
  for (const SinkEvent& e : sink_events) sink_times.push_back(e.time);
  while (true) {
    const bool atom_ok = ai < atoms.size() && atoms[ai].time <= t;
    const bool sink_ok = si < sink_times.size() && sink_times[si] <= t;
    if (!atom_ok && !sink_ok) break;
    const bool take_atom =
        atom_ok && (!sink_ok || atoms[ai].time <= sink_times[si]);
    if (take_atom) {
      const Atom& a = atoms[ai++];
      auto it = alive.lower_bound(a.label);
      if (it != alive.begin()) {
        --it;
        if (--it->second == 0) alive.erase(it);
      }
      alive.emplace(a.label, a.lives);
    } else {
      ++si;
      if (!alive.empty()) {
        auto it = std::prev(alive.end());
        if (--it->second == 0) alive.erase(it);
      }
    }
  }
  std::vector<ParticleState> out;
  out.reserve(alive.size());
  for (const auto& [label, remaining] : alive) out.push_back({label, remaining});
  return out;
}

uint64_t GraphicalRecord::roots_up_to(double t) const {
  return static_cast<uint64_t>(
      std::upper_bound(root_events.begin(), root_events.end(), t) -
      root_events.begin());
}

GraphicalRecord simulate(double x_lo, double x_hi, double t_max,
                         const OffspringDistribution& dist,
                         const SourcesSinks& boundary, RandomStream& rng,
                         std::size_t checkpoint_every) {
  const auto atoms = sample_marked_ppp(x_lo, x_hi, t_max, dist, rng);
  return simulate_atoms(x_lo, x_hi, t_max, atoms, boundary, checkpoint_every);
}

SourcesSinks stationary_boundary(double x_lo, double x_hi, double lambda,
                                 double alpha, double t_max, RandomStream& rng,
                                 double eps_trunc) {
  if (!(x_lo < x_hi))
    throw std::invalid_argument("stationary_boundary: x_lo >= x_hi");
  if (!(lambda >= 0.0))
    throw std::invalid_argument("stationary_boundary: lambda < 0");
  if (!(alpha > 0.0 && alpha <= 1.0))
    throw std::invalid_argument("stationary_boundary: alpha outside (0, 1]");
  SourcesSinks boundary;
  if (lambda > 0.0) {
    const uint64_t count = rng.poisson(lambda * (x_hi - x_lo));
    std::vector<double> labels(count);
    for (double& x : labels) x = rng.uniform(x_lo, x_hi);
    std::sort(labels.begin(), labels.end());
    boundary.sources.reserve(count);
    for (double x : labels)
      boundary.sources.emplace_back(x, rng.geometric(alpha));
  }
  boundary.sinks = sample_sink_process(lambda, alpha, t_max, rng, eps_trunc);
  return boundary;
}

uint64_t RootCountingProcess::value(double t) const {
  return static_cast<uint64_t>(
      std::upper_bound(jump_times.begin(), jump_times.end(), t) -
      jump_times.begin());
}

RootCountingProcess root_counting_process(const GraphicalRecord& record) {
  return RootCountingProcess{record.root_events};
}

BridgeResult poissonized_bridge(uint64_t n, const OffspringDistribution& dist,
                                RandomStream& rng) {
  BridgeResult out;
  out.arrival_times.reserve(n);
  out.root_counts.reserve(n);
  RootCounter counter;
  double t = 0.0;
  for (uint64_t k = 0; k < n; ++k) {
    t += rng.exponential(1.0);  // unit label interval: atom rate 1 in time
    const double label = rng.uniform(0.0, 1.0);
    counter.insert(label, dist.sample(rng));
    out.arrival_times.push_back(t);
    out.root_counts.push_back(counter.root_count());
  }
  return out;
}

std::string record_to_json(const GraphicalRecord& record) {
  nlohmann::ordered_json j;
  j["schema"] = "gr-1";
  j["horizon"] = {{"x_lo", record.x_lo},
                  {"x_hi", record.x_hi},
                  {"t_max", record.t_max}};
  auto& atoms = j["atoms"] = nlohmann::ordered_json::array();
  for (const Atom& a : record.atoms)
    atoms.push_back({{"label", a.label}, {"time", a.time}, {"lives", a.lives}});
  auto& sources = j["sources"] = nlohmann::ordered_json::array();
  for (const auto& [label, lives] : record.sources)
    sources.push_back({{"label", label}, {"lives", lives}});
  auto& verts = j["vertical_segments"] = nlohmann::ordered_json::array();
  for (const VerticalSegment& v : record.vertical_segments)
    verts.push_back({{"label", v.label},
                     {"t_birth", v.t_birth},
                     {"t_end", v.t_end},
                     {"vertex", v.vertex},
                     {"dies", v.dies}});
  auto& hors = j["horizontal_segments"] = nlohmann::ordered_json::array();
  for (const HorizontalSegment& h : record.horizontal_segments) {
    nlohmann::ordered_json jh;
    jh["time"] = h.time;
    jh["x_from"] = h.x_from;
    jh["x_to"] = h.x_to;
    if (h.child == kNoVertex)
      jh["child"] = nullptr;
    else
      jh["child"] = h.child;
    hors.push_back(std::move(jh));
  }
  j["root_events"] = record.root_events;
  auto& sinks = j["sink_events"] = nlohmann::ordered_json::array();
  for (const SinkEvent& e : record.sink_events) {
    nlohmann::ordered_json je;
    je["time"] = e.time;
    if (e.affected == kNoVertex)
      je["affected"] = nullptr;
    else
      je["affected"] = e.affected;
    sinks.push_back(std::move(je));
  }
  return j.dump(2) + "\n";
}

GraphicalRecord record_from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  if (!j.contains("schema") || j.at("schema").get<std::string>() != "gr-1")
    throw std::invalid_argument("record_from_json: unknown schema");
  std::vector<Atom> atoms;
  for (const auto& ja : j.at("atoms"))
    atoms.push_back({ja.at("label").get<double>(), ja.at("time").get<double>(),
                     ja.at("lives").get<uint32_t>()});
  SourcesSinks boundary;
  for (const auto& js : j.at("sources"))
    boundary.sources.emplace_back(js.at("label").get<double>(),
                                  js.at("lives").get<uint32_t>());
  for (const auto& je : j.at("sink_events"))
    boundary.sinks.push_back(je.at("time").get<double>());
  const auto& jh = j.at("horizon");
  // Rebuilding from events reproduces every derived field deterministically.
  return simulate_atoms(jh.at("x_lo").get<double>(),
                        jh.at("x_hi").get<double>(),
                        jh.at("t_max").get<double>(), atoms, boundary);
}

}  // namespace heapforest
