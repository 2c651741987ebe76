#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "heapforest/distributions.hpp"
#include "heapforest/hammersley.hpp"

namespace heapforest {

struct ColoredAtom {
  double label = 0.0;
  double time = 0.0;
  bool red = false;  // red removes the nearest particle on the left
};

// Two-color construction of the geometric-lives dynamics: every atom drops
// a new particle; a red atom (probability alpha) additionally removes its
// left neighbour. Sinks act on the current maximum: red removes it, blue
// only records a line. The alive set matches the geometric(alpha) process
// in law while every particle keeps a single life, so particles here are
// positions only.
struct RedBlueRecord {
  double x_lo = 0.0, x_hi = 1.0, t_max = 1.0;
  std::vector<ColoredAtom> atoms;  // time-ordered
  std::vector<double> source_positions;
  std::vector<double> sink_times;
  std::vector<bool> sink_red;
  std::vector<HorizontalSegment> horizontal_segments;
  std::vector<double> root_events;
  std::vector<double> final_positions;  // alive particles at t_max, ascending

  std::vector<double> positions_at(double t) const;

 private:
  struct Checkpoint {
    double time = 0.0;
    std::size_t next_atom = 0, next_sink = 0;
    std::vector<double> positions;
  };
  std::vector<Checkpoint> checkpoints_;
  friend RedBlueRecord simulate_redblue_atoms(double, double, double,
                                              const std::vector<ColoredAtom>&,
                                              const SourcesSinks&,
                                              std::size_t);
};

RedBlueRecord simulate_redblue_atoms(double x_lo, double x_hi, double t_max,
                                     const std::vector<ColoredAtom>& atoms,
                                     const SourcesSinks& boundary,
                                     std::size_t checkpoint_every = 1024);

// Samples unit-rate atoms, coloring each red with probability alpha.
// Source lives are ignored (the construction is memoryless); sink colors
// come from boundary.sink_red, defaulting to all red.
RedBlueRecord simulate_redblue(double x_lo, double x_hi, double t_max,
                               double alpha, const SourcesSinks& boundary,
                               RandomStream& rng,
                               std::size_t checkpoint_every = 1024);

// Position of the leftmost alive descendant of a distinguished source,
// sampled on a time grid, together with the gaps to its m nearest alive
// neighbours on the right. X is non-decreasing in t.
struct TaggedTrajectory {
  std::vector<double> times;
  std::vector<double> x;                       // tagged position
  std::vector<std::vector<double>> gaps;       // times.size() rows, m each
  double start_position = 0.0;                 // X(0)
  double window_lo = 0.0, window_hi = 0.0;     // final window after expansion
  uint32_t expansions = 0;
};

// Stationary-boundary run: sources PPP(lambda) with geometric(alpha) lives,
// sinks mimicking the atoms beyond the right edge. The tagged vertex is the
// first source at or right of 0; its descendants are marked on attachment.
// If the m-th right gap nears the window edge or the marked set empties,
// the window is widened with fresh strip randomness and the run replayed;
// the core realization is never resampled. window_width is the initial
// right extent; the left extent follows the 10*alpha/(lambda*(1-alpha))
// policy (10/lambda when alpha = 1).
TaggedTrajectory track_tagged_particle(double lambda, double alpha,
                                       double t_max, double window_width,
                                       uint32_t m_gaps, RandomStream& rng,
                                       const std::vector<double>& sample_times);

std::string trajectory_to_csv(const TaggedTrajectory& traj);

// Number of trees rooted in [-w, 0) that own a vertex with a nonnegative
// label by time t_max, under the stationary boundary.
uint64_t count_crossing_trees(double lambda, double alpha, double t_max,
                              double w, double w_right, RandomStream& rng);

}  // namespace heapforest
