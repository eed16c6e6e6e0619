#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "gausskry/nonlinear.hpp"
#include "gausskry/stepping.hpp"

namespace gausskry::cli {

/// Invalid command line or configuration; maps to exit code 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Command { linear_step, integrate, order_study, nonlinear_step, nonlinear_integrate, pade_audit, export_model };

std::string to_string(Command c);
Command parse_command(const std::string& name);

struct ExperimentConfig {
  Command command = Command::linear_step;
  std::string model = "mass-spring";
  Index n = 50;
  double mass = kDefaultMass;
  double spring = kDefaultSpring;
  std::vector<int> s = {1};
  std::vector<double> h_list = {0.1};
  double t_end = 1.0;
  std::vector<LinearSolver> solvers = {LinearSolver::qaa_v1};
  std::vector<NonlinearMethod> methods = {NonlinearMethod::fixed_point, NonlinearMethod::cayley_bfgs};
  Tolerance tol;
  Index k_max = 200;
  std::string out = "gausskry-out";
  bool strict = false;
  std::uint64_t seed = 0;
  /// Fill the elapsed_ns column; off by default so reruns are byte-identical.
  bool timing = false;
};

/// Parses argv (flags > --config JSON > defaults) and validates the result.
/// Throws UsageError; "--help" is reported through the help_text argument.
ExperimentConfig parse_arguments(int argc, const char* const* argv, std::string* help_text = nullptr);

/// Throws UsageError on an inconsistent configuration.
void validate(const ExperimentConfig& cfg);

struct RunOutcome {
  bool all_converged = true;
  std::vector<std::string> files;
};

/// Executes the command, writing files below cfg.out and a short log.
RunOutcome run(const ExperimentConfig& cfg, std::ostream& log);

/// Full entry point: 0 on success, 1 on runtime failure, 2 on usage error,
/// 3 on non-convergence under --strict.
int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// GAUSSKRY_THREADS if set and positive, else the hardware concurrency.
unsigned worker_count(std::size_t tasks);

}  // namespace gausskry::cli
