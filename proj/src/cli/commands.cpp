#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <ostream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "gausskry/cli.hpp"
#include "gausskry/io.hpp"

namespace gausskry::cli {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

// Runs every task on a bounded pool; the first exception is rethrown after
// all workers have joined.
void run_pool(const std::vector<std::function<void()>>& tasks) {
  const unsigned workers = worker_count(tasks.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < tasks.size(); i = next++) {
      try {
        tasks[i]();
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
}

PoissonModel make_model(const ExperimentConfig& cfg) {
  if (cfg.model == "mass-spring") return mass_spring_chain(cfg.n, cfg.mass, cfg.spring, cfg.seed);
  return rigid_body(2.0, 1.0, 2.0 / 3.0, cfg.seed);
}

void strip_timing(IterationTrace& trace, bool timing) {
  if (timing) return;
  for (TraceRow& row : trace) row.elapsed_ns = 0;
}

double max_dev(const IterationTrace& trace) {
  double m = 0.0;
  for (const TraceRow& row : trace) m = std::max(m, row.energy_dev);
  return m;
}

class OutputDir {
 public:
  explicit OutputDir(const std::string& path) : root_(path) { fs::create_directories(root_); }

  std::ofstream open(const std::string& name) {
    const fs::path p = root_ / name;
    std::ofstream out(p, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + p.string() + "'");
    std::lock_guard<std::mutex> lock(mutex_);
    files_.push_back(p.string());
    return out;
  }

  std::vector<std::string> files() const {
    std::vector<std::string> f = files_;
    std::sort(f.begin(), f.end());
    return f;
  }

 private:
  fs::path root_;
  std::mutex mutex_;
  std::vector<std::string> files_;
};

std::string h_tag(double h) { return "h" + format_double(h); }

json config_json(const ExperimentConfig& cfg) {
  json j;
  j["command"] = to_string(cfg.command);
  j["model"] = cfg.model;
  if (cfg.model == "mass-spring") {
    j["n"] = cfg.n;
    j["mass"] = cfg.mass;
    j["spring"] = cfg.spring;
  }
  j["s"] = cfg.s;
  j["h_list"] = cfg.h_list;
  j["t_end"] = cfg.t_end;
  std::vector<std::string> solvers;
  for (LinearSolver s : cfg.solvers) solvers.push_back(to_string(s));
  j["solver"] = solvers;
  std::vector<std::string> methods;
  for (NonlinearMethod m : cfg.methods) methods.push_back(to_string(m));
  j["method"] = methods;
  j["tol"] = cfg.tol.to_string();
  j["k_max"] = cfg.k_max;
  j["seed"] = cfg.seed;
  return j;
}

void write_json(OutputDir& dir, const std::string& name, const json& j) {
  std::ofstream out = dir.open(name);
  out << j.dump(2) << '\n';
}

json row_json(const SummaryRow& r) {
  auto num = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
  return {{"h", r.h},
          {"s", r.s},
          {"solver", r.solver},
          {"l2_error", num(r.l2_error)},
          {"max_energy_dev", num(r.max_energy_dev)},
          {"avg_iters_per_step", r.avg_iters_per_step},
          {"total_steps", r.total_steps},
          {"converged", r.converged}};
}

StepPolicy linear_policy(const ExperimentConfig& cfg, int s, double h, LinearSolver solver) {
  StepPolicy p;
  p.s = s;
  p.h = h;
  p.solver = solver;
  p.tol = cfg.tol;
  p.k_max = cfg.k_max;
  return p;
}

NonlinearPolicy nonlinear_policy(const ExperimentConfig& cfg, double h, NonlinearMethod method) {
  NonlinearPolicy p;
  p.h = h;
  p.method = method;
  p.tol = cfg.tol;
  p.k_max = cfg.k_max;
  return p;
}

RunOutcome run_linear_step(const ExperimentConfig& cfg, std::ostream& log) {
  const PoissonModel model = make_model(cfg);
  const double h = cfg.h_list.front();
  OutputDir dir(cfg.out);

  struct Cell {
    LinearSolver solver;
    int s;
    LinearSolveReport report;
  };
  std::vector<Cell> cells;
  for (LinearSolver solver : cfg.solvers)
    for (int s : cfg.s) cells.push_back({solver, s, {}});

  std::vector<std::function<void()>> tasks;
  for (Cell& cell : cells) {
    tasks.emplace_back([&cfg, &model, &dir, &cell, h] {
      auto [y, report] = gauss_step_linear(model, model.y0(), linear_policy(cfg, cell.s, h, cell.solver));
      strip_timing(report.trace, cfg.timing);
      std::ofstream out = dir.open("trace_" + to_string(cell.solver) + "_s" + std::to_string(cell.s) + ".csv");
      write_trace_csv(out, report.trace);
      cell.report = std::move(report);
    });
  }
  run_pool(tasks);

  RunOutcome outcome;
  for (const Cell& c : cells) {
    log << to_string(c.solver) << " s=" << c.s << " k=" << c.report.k
        << " residual=" << format_double(c.report.residual_euclid)
        << " max_energy_dev=" << format_double(max_dev(c.report.trace))
        << (c.report.converged ? "" : " (not converged)") << '\n';
    outcome.all_converged = outcome.all_converged && c.report.converged;
  }
  outcome.files = dir.files();
  return outcome;
}

struct StudyCell {
  double h = 0.0;
  int s = 1;
  std::string solver;
  LinearSolver linear = LinearSolver::qaa_v1;
  NonlinearMethod method = NonlinearMethod::fixed_point;
  SummaryRow row;
};

// Shared driver of integrate, order-study and nonlinear-integrate: one
// trajectory per cell, compared against a reference on the same grid.
RunOutcome run_sweep(const ExperimentConfig& cfg, std::vector<StudyCell> cells, bool nonlinear, bool fit_slopes,
                     std::ostream& log) {
  const PoissonModel model = make_model(cfg);
  OutputDir dir(cfg.out);

  std::map<double, TrajectoryReport> references;
  for (const StudyCell& c : cells) {
    if (references.count(c.h)) continue;
    const auto grid = uniform_grid(cfg.t_end, c.h);
    if (nonlinear) {
      references[c.h] = reference_nonlinear(model, grid);
    } else if (model.dim() <= kDenseReferenceLimit) {
      references[c.h] = reference_linear(model, grid);
    }
  }

  std::vector<std::function<void()>> tasks;
  for (StudyCell& cell : cells) {
    tasks.emplace_back([&, &cell = cell] {
      const TrajectoryReport traj = nonlinear
                                        ? integrate_nonlinear(model, cfg.t_end, nonlinear_policy(cfg, cell.h, cell.method))
                                        : integrate_linear(model, cfg.t_end, linear_policy(cfg, cell.s, cell.h, cell.linear));
      SummaryRow& r = cell.row;
      r.h = cell.h;
      r.s = cell.s;
      r.solver = cell.solver;
      const auto ref = references.find(cell.h);
      r.l2_error = ref == references.end() ? std::nan("") : l2_error(traj, ref->second);
      r.max_energy_dev = traj.max_energy_dev;
      r.avg_iters_per_step = traj.avg_iterations();
      r.total_steps = traj.total_steps();
      r.converged = traj.all_converged();
      std::ofstream out =
          dir.open("trajectory_" + cell.solver + "_s" + std::to_string(cell.s) + "_" + h_tag(cell.h) + ".csv");
      write_trajectory_csv(out, traj);
    });
  }
  run_pool(tasks);

  RunOutcome outcome;
  std::vector<SummaryRow> rows;
  json summary;
  summary["config"] = config_json(cfg);
  summary["rows"] = json::array();
  for (const StudyCell& c : cells) {
    rows.push_back(c.row);
    summary["rows"].push_back(row_json(c.row));
    outcome.all_converged = outcome.all_converged && c.row.converged;
    log << c.solver << " s=" << c.s << " h=" << format_double(c.h) << " l2_error=" << format_double(c.row.l2_error)
        << " max_energy_dev=" << format_double(c.row.max_energy_dev)
        << " avg_iters=" << format_double(c.row.avg_iters_per_step) << (c.row.converged ? "" : " (not converged)")
        << '\n';
  }
  {
    std::ofstream out = dir.open("summary.csv");
    write_summary_csv(out, rows);
  }
  if (fit_slopes) {
    std::map<std::pair<int, std::string>, std::pair<std::vector<double>, std::vector<double>>> series;
    std::vector<std::pair<int, std::string>> order;
    for (const SummaryRow& r : rows) {
      const auto key = std::make_pair(r.s, r.solver);
      if (!series.count(key)) order.push_back(key);
      series[key].first.push_back(r.h);
      series[key].second.push_back(r.l2_error);
    }
    summary["slopes"] = json::array();
    for (const auto& key : order) {
      const double slope = fit_order(series[key].first, series[key].second);
      summary["slopes"].push_back(
          {{"s", key.first}, {"solver", key.second}, {"slope", std::isfinite(slope) ? json(slope) : json(nullptr)}});
      log << "slope " << key.second << " s=" << key.first << ": " << format_double(slope) << '\n';
    }
  }
  write_json(dir, "summary.json", summary);
  outcome.files = dir.files();
  return outcome;
}

RunOutcome run_nonlinear_step(const ExperimentConfig& cfg, std::ostream& log) {
  const PoissonModel model = make_model(cfg);
  const double h = cfg.h_list.front();
  OutputDir dir(cfg.out);

  std::vector<NonlinearSolveReport> reports(cfg.methods.size());
  std::vector<std::function<void()>> tasks;
  for (std::size_t i = 0; i < cfg.methods.size(); ++i) {
    tasks.emplace_back([&, i] {
      auto [y, report] = gauss_step_nonlinear(model, model.y0(), nonlinear_policy(cfg, h, cfg.methods[i]));
      strip_timing(report.trace, cfg.timing);
      std::ofstream out = dir.open("trace_" + to_string(cfg.methods[i]) + ".csv");
      write_trace_csv(out, report.trace, "method", to_string(cfg.methods[i]));
      reports[i] = std::move(report);
    });
  }
  run_pool(tasks);

  RunOutcome outcome;
  for (const NonlinearSolveReport& r : reports) {
    const double res = r.trace.empty() ? std::nan("") : r.trace.back().residual;
    log << to_string(r.method) << " k=" << r.k_used << " residual=" << format_double(res)
        << " max_energy_dev=" << format_double(max_dev(r.trace)) << (r.converged ? "" : " (not converged)") << '\n';
    outcome.all_converged = outcome.all_converged && r.converged;
  }
  outcome.files = dir.files();
  return outcome;
}

json audit_degree(int s) {
  const PadeData p = build_pade(s);
  json j = to_json(p);
  json checks;

  bool paired = true;
  for (std::size_t a = 0; a < p.poles.size(); ++a) {
    if (p.is_real_pole(a)) {
      paired = paired && p.weights[a].imag() == 0.0;
      continue;
    }
    bool found = false;
    for (std::size_t b = 0; b < p.poles.size(); ++b) {
      if (b != a && p.poles[b] == std::conj(p.poles[a]) && p.weights[b] == std::conj(p.weights[a])) found = true;
    }
    paired = paired && found;
  }
  checks["conjugate_pairing"] = paired;

  double min_re = INFINITY;
  for (const Complex& t : p.poles) min_re = std::min(min_re, t.real());
  checks["min_pole_real_part"] = min_re;
  checks["right_half_plane"] = min_re > 0.0;

  const double kappa = lipschitz_constant(p.poles, p.weights);
  checks["kappa_recomputed"] = kappa;
  checks["kappa_consistent"] = std::abs(kappa - p.kappa) <= 1e-12 * std::max(1.0, kappa);

  double unit_err = 0.0;
  double pfd_err = 0.0;
  for (int i = -200; i <= 200; ++i) {
    const Complex z(0.0, 0.25 * i);
    const Complex r = eval_scalar(p, z);
    unit_err = std::max(unit_err, std::abs(std::abs(r) - 1.0));
    pfd_err = std::max(pfd_err, std::abs(r - eval_scalar_pfd(p, z)));
  }
  checks["max_unit_modulus_error_imag_axis"] = unit_err;
  checks["max_partial_fraction_mismatch"] = pfd_err;
  checks["unit_modulus"] = unit_err <= 1e-12;
  j["checks"] = checks;
  return j;
}

RunOutcome run_pade_audit(const ExperimentConfig& cfg, std::ostream& log) {
  OutputDir dir(cfg.out);
  json audit = json::array();
  bool ok = true;
  for (int s : cfg.s) {
    json entry = audit_degree(s);
    const json& c = entry["checks"];
    const bool pass = c["conjugate_pairing"].get<bool>() && c["right_half_plane"].get<bool>() &&
                      c["kappa_consistent"].get<bool>() && c["unit_modulus"].get<bool>();
    ok = ok && pass;
    log << "s=" << s << " kappa=" << format_double(entry["kappa"].get<double>()) << " checks "
        << (pass ? "pass" : "FAIL") << '\n';
    audit.push_back(std::move(entry));
  }
  write_json(dir, "pade_audit.json", audit);
  RunOutcome outcome;
  outcome.all_converged = ok;
  outcome.files = dir.files();
  return outcome;
}

RunOutcome run_export_model(const ExperimentConfig& cfg, std::ostream& log) {
  const PoissonModel model = make_model(cfg);
  OutputDir dir(cfg.out);
  // State-dependent structure is exported at the initial state.
  const SparseMatrix j = model.is_linear() ? model.constant_structure() : model.structure(model.y0());
  {
    std::ofstream out = dir.open("J.mtx");
    write_matrix_market(out, j);
  }
  {
    std::ofstream out = dir.open("Q.mtx");
    write_matrix_market(out, model.q());
  }
  {
    std::ofstream out = dir.open("y0.mtx");
    write_matrix_market(out, SparseMatrix(Matrix(model.y0()).sparseView()));
  }
  json desc = model.describe();
  desc["structure_at_initial_state"] = !model.is_linear();
  write_json(dir, "model.json", desc);
  log << "exported " << model.label() << " (n=" << model.dim() << ")\n";
  RunOutcome outcome;
  outcome.files = dir.files();
  return outcome;
}

}  // namespace

unsigned worker_count(std::size_t tasks) {
  unsigned cap = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("GAUSSKRY_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) cap = static_cast<unsigned>(v);
  }
  return static_cast<unsigned>(std::max<std::size_t>(1, std::min<std::size_t>(cap, tasks)));
}

RunOutcome run(const ExperimentConfig& cfg, std::ostream& log) {
  validate(cfg);
  switch (cfg.command) {
    case Command::linear_step: return run_linear_step(cfg, log);
    case Command::integrate:
    case Command::order_study:
    case Command::nonlinear_integrate: {
      const bool nonlinear = cfg.model != "mass-spring";
      std::vector<StudyCell> cells;
      for (double h : cfg.h_list) {
        if (nonlinear) {
          for (NonlinearMethod m : cfg.methods) {
            StudyCell c;
            c.h = h;
            c.s = 1;
            c.solver = to_string(m);
            c.method = m;
            cells.push_back(c);
          }
        } else {
          for (int s : cfg.s)
            for (LinearSolver solver : cfg.solvers) {
              StudyCell c;
              c.h = h;
              c.s = s;
              c.solver = to_string(solver);
              c.linear = solver;
              cells.push_back(c);
            }
        }
      }
      return run_sweep(cfg, std::move(cells), nonlinear, cfg.command == Command::order_study, log);
    }
    case Command::nonlinear_step: return run_nonlinear_step(cfg, log);
    case Command::pade_audit: return run_pade_audit(cfg, log);
    case Command::export_model: return run_export_model(cfg, log);
  }
  throw UsageError("unknown command");
}

int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  ExperimentConfig cfg;
  std::string help;
  try {
    cfg = parse_arguments(argc, argv, &help);
  } catch (const CLI::CallForHelp&) {
    out << help;
    return 0;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\nrun 'gausskry --help' for usage\n";
    return 2;
  }
  try {
    const RunOutcome outcome = run(cfg, out);
    for (const std::string& f : outcome.files) out << "wrote " << f << '\n';
    if (cfg.strict && !outcome.all_converged) {
      err << "error: at least one run did not converge\n";
      return 3;
    }
    return 0;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace gausskry::cli
