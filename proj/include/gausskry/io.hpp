#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "gausskry/krylov.hpp"
#include "gausskry/trajectory.hpp"

namespace gausskry {

inline constexpr const char* kCsvVersionLine = "# gausskry-csv v1";

/// Shortest decimal representation that round-trips; locale independent.
std::string format_double(double v);

/// Per-iteration trace in long format. A non-empty label adds a second
/// column, after k, with that header and value on every row.
void write_trace_csv(std::ostream& out, const IterationTrace& trace, const std::string& label_header = "",
                     const std::string& label = "");

struct SummaryRow {
  double h = 0.0;
  int s = 0;
  std::string solver;
  double l2_error = 0.0;
  double max_energy_dev = 0.0;
  double avg_iters_per_step = 0.0;
  Index total_steps = 0;
  bool converged = true;
};

void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows);

/// t, energy_dev and the iteration count of the step that produced the state.
void write_trajectory_csv(std::ostream& out, const TrajectoryReport& traj);

}  // namespace gausskry
