#include "gausskry/io.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <ostream>

namespace gausskry {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

void write_trace_csv(std::ostream& out, const IterationTrace& trace, const std::string& label_header,
                     const std::string& label) {
  const bool labelled = !label_header.empty();
  out << kCsvVersionLine << '\n';
  out << 'k' << (labelled ? "," + label_header : "") << ",residual_euclid,energy_dev,elapsed_ns\n";
  for (const TraceRow& row : trace) {
    out << row.k;
    if (labelled) out << ',' << label;
    out << ',' << format_double(row.residual) << ',' << format_double(row.energy_dev) << ','
        << row.elapsed_ns << '\n';
  }
}

void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows) {
  out << kCsvVersionLine << '\n';
  out << "h,s,solver,l2_error,max_energy_dev,avg_iters_per_step,total_steps,converged\n";
  for (const SummaryRow& r : rows) {
    out << format_double(r.h) << ',' << r.s << ',' << r.solver << ',' << format_double(r.l2_error) << ','
        << format_double(r.max_energy_dev) << ',' << format_double(r.avg_iters_per_step) << ',' << r.total_steps
        << ',' << (r.converged ? 1 : 0) << '\n';
  }
}

void write_trajectory_csv(std::ostream& out, const TrajectoryReport& traj) {
  out << kCsvVersionLine << '\n';
  out << "t,energy_dev,iterations\n";
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    const Index iters = i == 0 || i - 1 >= traj.iterations.size() ? 0 : traj.iterations[i - 1];
    const double dev = i < traj.energy_dev.size() ? traj.energy_dev[i] : 0.0;
    out << format_double(traj.times[i]) << ',' << format_double(dev) << ',' << iters << '\n';
  }
}

}  // namespace gausskry
