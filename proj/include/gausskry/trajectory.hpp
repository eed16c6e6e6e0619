#pragma once

#include <vector>

#include "gausskry/core.hpp"

namespace gausskry {

/// Time-stepping result on a uniform grid, with per-step diagnostics.
struct TrajectoryReport {
  std::vector<double> times;
  std::vector<Vector> states;
  std::vector<Index> iterations;  // one entry per step (size = states - 1)
  std::vector<bool> converged;
  std::vector<double> energy_dev;  // |1 - ||y_i||_Q / ||y_0||_Q| per state
  double max_energy_dev = 0.0;

  Index total_steps() const { return static_cast<Index>(iterations.size()); }
  double avg_iterations() const;
  bool all_converged() const;
};

inline double TrajectoryReport::avg_iterations() const {
  if (iterations.empty()) return 0.0;
  double sum = 0.0;
  for (Index k : iterations) sum += static_cast<double>(k);
  return sum / static_cast<double>(iterations.size());
}

inline bool TrajectoryReport::all_converged() const {
  for (bool c : converged)
    if (!c) return false;
  return true;
}

/// t_i = i h for i = 0..T/h. Throws InvalidInput if h does not divide T.
std::vector<double> uniform_grid(double t_end, double h);

}  // namespace gausskry
