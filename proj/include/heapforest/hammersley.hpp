#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "heapforest/distributions.hpp"
#include "heapforest/heap_sort.hpp"

namespace heapforest {

// Boundary conditions: initial particles on the bottom edge, life-removal
// times on the right edge. sink_red is used only by the red/blue variant;
// when non-empty it must have one flag per sink (blue sinks touch nothing).
struct SourcesSinks {
  std::vector<std::pair<double, uint32_t>> sources;  // (label, lives) at t = 0
  std::vector<double> sinks;                         // ascending, positive
  std::vector<bool> sink_red;
};

struct VerticalSegment {
  double label = 0.0;
  double t_birth = 0.0;
  double t_end = 0.0;  // death time, or the horizon if still alive
  uint32_t vertex = kNoVertex;
  bool dies = false;
};

// Attachment (father to child), root (left boundary to child) or sink line
// (particle to right boundary; child == kNoVertex).
struct HorizontalSegment {
  double time = 0.0;
  double x_from = 0.0;
  double x_to = 0.0;
  uint32_t child = kNoVertex;
};

struct SinkEvent {
  double time = 0.0;
  uint32_t affected = kNoVertex;  // kNoVertex: nothing was alive
};

struct ParticleState {
  double label = 0.0;
  uint32_t remaining = 0;
};

// Space-time diagram of one simulation run, with enough bookkeeping to
// answer configuration queries at any time by replaying from the nearest
// checkpoint.
struct GraphicalRecord {
  double x_lo = 0.0, x_hi = 1.0, t_max = 1.0;
  std::vector<Atom> atoms;  // time-ordered
  std::vector<std::pair<double, uint32_t>> sources;
  std::vector<VertexRecord> vertices;  // sources first, then atoms
  std::vector<VerticalSegment> vertical_segments;
  std::vector<HorizontalSegment> horizontal_segments;
  std::vector<double> root_events;  // ascending
  std::vector<SinkEvent> sink_events;

  // Alive particles (label-ascending) at any 0 <= t <= t_max.
  std::vector<ParticleState> configuration_at(double t) const;
  uint64_t roots_up_to(double t) const;

 private:
  struct Checkpoint {
    double time = 0.0;
    std::size_t next_atom = 0, next_sink = 0;
    std::vector<ParticleState> alive;
  };
  std::vector<Checkpoint> checkpoints_;
  friend GraphicalRecord simulate_atoms(double, double, double,
                                        const std::vector<Atom>&,
                                        const SourcesSinks&, std::size_t);
};

// Deterministic core: replays given atoms (time-ordered) against the
// boundary. Checkpoint spacing is configurable for the replay queries.
GraphicalRecord simulate_atoms(double x_lo, double x_hi, double t_max,
                               const std::vector<Atom>& atoms,
                               const SourcesSinks& boundary,
                               std::size_t checkpoint_every = 1024);

// Samples a unit-intensity marked Poisson field and runs the dynamics.
GraphicalRecord simulate(double x_lo, double x_hi, double t_max,
                         const OffspringDistribution& dist,
                         const SourcesSinks& boundary, RandomStream& rng,
                         std::size_t checkpoint_every = 1024);

// Stationary boundary for rate-lambda sources: lives are geometric(alpha)
// and sinks follow intensity 1/(lambda + (1-alpha)s). lambda = 0 gives the
// grown-from-nothing variant (no sources, truncated sinks); alpha = 1 gives
// the classical line process (unit lives, homogeneous sinks of rate
// 1/lambda).
SourcesSinks stationary_boundary(double x_lo, double x_hi, double lambda,
                                 double alpha, double t_max, RandomStream& rng,
                                 double eps_trunc = 0.0);

// Step function t -> number of trees started by time t.
struct RootCountingProcess {
  std::vector<double> jump_times;  // ascending
  uint64_t value(double t) const;
};
RootCountingProcess root_counting_process(const GraphicalRecord& record);

// Discrete-n view of the continuous process: unit-rate arrivals on [0,1],
// root counts after each of the first n atoms.
struct BridgeResult {
  std::vector<double> arrival_times;
  std::vector<uint64_t> root_counts;
};
BridgeResult poissonized_bridge(uint64_t n, const OffspringDistribution& dist,
                                RandomStream& rng);

// Record serialization, schema "gr-1".
std::string record_to_json(const GraphicalRecord& record);
GraphicalRecord record_from_json(const std::string& text);

}  // namespace heapforest
