#pragma once

#include <cstdint>
#include <set>
#include <vector>

#include "heapforest/distributions.hpp"
#include "heapforest/hammersley.hpp"

namespace heapforest {

// Finite set of distinct heights in (0, t_max). Exact height collisions are
// rejected: they have probability zero under the intended inputs and hide
// bookkeeping bugs otherwise.
class RootConfiguration {
 public:
  RootConfiguration() = default;
  explicit RootConfiguration(const std::vector<double>& heights,
                             double t_max);

  void insert(double h);
  // Removes the k lowest heights strictly above s (fewer if not available).
  void erase_lowest_above(double s, uint32_t k);
  // Removes the k lowest heights overall.
  void erase_lowest(uint32_t k);

  std::size_t size() const { return heights_.size(); }
  std::vector<double> heights() const;
  const std::set<double>& set() const { return heights_; }

 private:
  std::set<double> heights_;
};

// Dual dynamics of the forest's root count, run over the atom field scanned
// by decreasing label. Event coordinates are x = -label (atoms) and
// x = -position (sources), both processed in increasing x up to x_max.
struct RootEvolution {
  RootConfiguration final_config;
  std::vector<RootConfiguration> at_checkpoints;  // one per checkpoint x
};

// sinks_init: starting heights. sources: (position < 0, lives), decreasing
// position. atoms: negative labels sorted by decreasing label; the atom
// (label, s, lives) inserts height s and deletes the `lives` lowest heights
// strictly above s; a source deletes its `lives` lowest heights overall.
// Heights at or above t_max are rejected.
RootEvolution evolve(const RootConfiguration& sinks_init,
                     const std::vector<std::pair<double, uint32_t>>& sources,
                     const std::vector<Atom>& atoms, double x_max,
                     double t_max,
                     const std::vector<double>& checkpoint_xs = {});

// Runs the forest on the box and the dual scan over the same atoms
// (initial heights = sink times, sources shifted onto the negative axis)
// and compares the final height set with the forest's root event times plus
// the times of sinks that found nothing to absorb, exactly.
struct DualityOutcome {
  std::vector<double> forest_root_times;
  std::vector<double> dual_heights;
  bool match = false;
};
DualityOutcome duality_check(double x_lo, double x_hi, double t_max,
                             const std::vector<Atom>& atoms,
                             const SourcesSinks& boundary);

// Non-decreasing right-continuous step function on [0, a_f), +infinity
// afterwards. steps.front().first must be 0.
class MonotoneBoundary {
 public:
  MonotoneBoundary(std::vector<std::pair<double, double>> steps, double a_f);
  double value(double x) const;  // +infinity for x >= a_f
  double a_f() const { return a_f_; }
  const std::vector<std::pair<double, double>>& steps() const {
    return steps_;
  }
  // Lowest non-decreasing step majorant of finitely many points, 0 before
  // the first point.
  static MonotoneBoundary lowest_majorant(
      const std::vector<std::pair<double, double>>& points, double a_f);

 private:
  std::vector<std::pair<double, double>> steps_;
  double a_f_;
};

// Drops every atom by the boundary height under it: (x, t, v) becomes
// (x, t - f(x), v). Atoms on or below the boundary (including x >= a_f)
// are rejected. Root counts never decrease under this map.
std::vector<Atom> falling_map(const std::vector<Atom>& atoms,
                              const MonotoneBoundary& f);

}  // namespace heapforest
