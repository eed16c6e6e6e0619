#include <cmath>
#include <fstream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "gausskry/cli.hpp"

namespace gausskry::cli {

namespace {

using nlohmann::json;

double parse_double(const std::string& text, const std::string& what) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    throw UsageError(what + ": '" + text + "' is not a number");
  }
  if (used != text.size() || !std::isfinite(v)) throw UsageError(what + ": '" + text + "' is not a number");
  return v;
}

long long parse_integer(const std::string& text, const std::string& what) {
  std::size_t used = 0;
  long long v = 0;
  try {
    v = std::stoll(text, &used);
  } catch (const std::exception&) {
    throw UsageError(what + ": '" + text + "' is not an integer");
  }
  if (used != text.size()) throw UsageError(what + ": '" + text + "' is not an integer");
  return v;
}

std::vector<std::string> split_list(const std::vector<std::string>& items) {
  std::vector<std::string> out;
  for (const std::string& item : items) {
    std::stringstream ss(item);
    std::string part;
    while (std::getline(ss, part, ',')) {
      if (!part.empty()) out.push_back(part);
    }
  }
  return out;
}

// Config values may be scalars or arrays; both become string lists so that
// flags and file entries share one parser.
std::vector<std::string> json_list(const json& v, const std::string& key) {
  std::vector<std::string> out;
  auto one = [&](const json& e) {
    if (e.is_string()) {
      out.push_back(e.get<std::string>());
    } else if (e.is_number()) {
      std::ostringstream os;
      os.precision(17);
      os << e.get<double>();
      out.push_back(os.str());
    } else {
      throw UsageError("config: entry '" + key + "' has an unsupported type");
    }
  };
  if (v.is_array()) {
    for (const json& e : v) one(e);
  } else {
    one(v);
  }
  return out;
}

std::string json_scalar(const json& v, const std::string& key) {
  const auto list = json_list(v, key);
  if (list.size() != 1) throw UsageError("config: entry '" + key + "' must be a single value");
  return list.front();
}

json load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file '" + path + "'");
  try {
    json j = json::parse(in);
    if (!j.is_object()) throw UsageError("config file must contain a JSON object");
    return j;
  } catch (const json::parse_error& e) {
    throw UsageError("config file '" + path + "': " + e.what());
  }
}

const std::vector<std::string> kConfigKeys = {"model", "n",      "mass",   "spring", "s",     "h",      "h_list",
                                              "t_end", "solver", "method", "tol",    "k_max", "out",    "strict",
                                              "seed",  "timing"};

}  // namespace

std::string to_string(Command c) {
  switch (c) {
    case Command::linear_step: return "linear-step";
    case Command::integrate: return "integrate";
    case Command::order_study: return "order-study";
    case Command::nonlinear_step: return "nonlinear-step";
    case Command::nonlinear_integrate: return "nonlinear-integrate";
    case Command::pade_audit: return "pade-audit";
    case Command::export_model: return "export-model";
  }
  return "unknown";
}

Command parse_command(const std::string& name) {
  for (Command c : {Command::linear_step, Command::integrate, Command::order_study, Command::nonlinear_step,
                    Command::nonlinear_integrate, Command::pade_audit, Command::export_model}) {
    if (to_string(c) == name) return c;
  }
  throw UsageError("unknown command '" + name + "'");
}

ExperimentConfig parse_arguments(int argc, const char* const* argv, std::string* help_text) {
  CLI::App app{"Energy-conserving Gauss integrators for Poisson systems with quadratic Hamiltonians", "gausskry"};
  app.set_help_flag("--help", "Print this help message and exit");

  std::string command;
  std::string config_path;
  std::string model, n, mass, spring, h, t_end, tol, k_max, out, seed;
  std::vector<std::string> s_list, h_list, solvers, methods;
  bool strict = false;
  bool timing = false;

  app.add_option("command", command,
                 "linear-step | integrate | order-study | nonlinear-step | nonlinear-integrate | pade-audit | "
                 "export-model")
      ->required();
  app.add_option("--config", config_path, "JSON file with defaults; flags take precedence");
  app.add_option("--model", model, "mass-spring | rigid-body");
  app.add_option("--n", n, "Number of oscillators of the mass-spring chain");
  app.add_option("--mass", mass, "Mass of every oscillator");
  app.add_option("--spring", spring, "Stiffness of every spring");
  app.add_option("--s", s_list, "Gauss stage count(s), comma separated");
  auto* h_opt = app.add_option("--h", h, "Step size");
  auto* hl_opt = app.add_option("--h-list", h_list, "Step sizes, comma separated");
  h_opt->excludes(hl_opt);
  app.add_option("--t-end", t_end, "Integration horizon");
  app.add_option("--solver", solvers, "qaa-v1 | qaa-v2 | gmres | exp-arnoldi | dense, comma separated");
  app.add_option("--method", methods, "fp | cayley-bfgs, comma separated");
  app.add_option("--tol", tol, "order | fixed:<value>");
  app.add_option("--k-max", k_max, "Iteration cap per solve");
  app.add_option("--out", out, "Output directory");
  app.add_flag("--strict", strict, "Exit nonzero if any solve fails to converge");
  app.add_option("--seed", seed, "Seed for randomized model validation");
  app.add_flag("--timing", timing, "Record wall-clock time per iteration");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    if (help_text) *help_text = app.help();
    throw;
  } catch (const CLI::ParseError& e) {
    throw UsageError(e.what());
  }

  ExperimentConfig cfg;
  cfg.command = parse_command(command);

  json file = json::object();
  if (!config_path.empty()) {
    file = load_config(config_path);
    for (const auto& item : file.items()) {
      if (std::find(kConfigKeys.begin(), kConfigKeys.end(), item.key()) == kConfigKeys.end()) {
        throw UsageError("config: unknown key '" + item.key() + "'");
      }
    }
  }

  // Flag value if given, else the config entry, else nothing.
  auto scalar = [&](const std::string& flag_value, const char* flag, const std::string& key) -> std::optional<std::string> {
    if (app.count(flag) > 0) return flag_value;
    if (file.contains(key)) return json_scalar(file[key], key);
    return std::nullopt;
  };
  auto list = [&](const std::vector<std::string>& flag_values, const char* flag,
                  const std::string& key) -> std::optional<std::vector<std::string>> {
    if (app.count(flag) > 0) return split_list(flag_values);
    if (file.contains(key)) return split_list(json_list(file[key], key));
    return std::nullopt;
  };
  auto boolean = [&](bool flag_value, const char* flag, const std::string& key) {
    if (app.count(flag) > 0) return flag_value;
    if (file.contains(key)) {
      if (!file[key].is_boolean()) throw UsageError("config: entry '" + key + "' must be a boolean");
      return file[key].get<bool>();
    }
    return false;
  };

  if (auto v = scalar(model, "--model", "model")) cfg.model = *v;
  if (cfg.command == Command::nonlinear_step || cfg.command == Command::nonlinear_integrate) {
    if (app.count("--model") == 0 && !file.contains("model")) cfg.model = "rigid-body";
  }
  if (auto v = scalar(n, "--n", "n")) cfg.n = parse_integer(*v, "--n");
  if (auto v = scalar(mass, "--mass", "mass")) cfg.mass = parse_double(*v, "--mass");
  if (auto v = scalar(spring, "--spring", "spring")) cfg.spring = parse_double(*v, "--spring");
  if (auto v = list(s_list, "--s", "s")) {
    cfg.s.clear();
    for (const auto& e : *v) cfg.s.push_back(static_cast<int>(parse_integer(e, "--s")));
    if (cfg.s.empty()) throw UsageError("--s: empty list");
  } else if (cfg.command == Command::pade_audit) {
    cfg.s = {1, 2, 3, 4, 5, 6, 7, 8};
  }

  std::optional<std::vector<std::string>> hs;
  if (app.count("--h") > 0) {
    hs = std::vector<std::string>{h};
  } else if (app.count("--h-list") > 0) {
    hs = split_list(h_list);
    if (hs->empty()) throw UsageError("--h-list: empty list");
  } else if (file.contains("h") && file.contains("h_list")) {
    throw UsageError("config: 'h' and 'h_list' are mutually exclusive");
  } else if (file.contains("h")) {
    hs = std::vector<std::string>{json_scalar(file["h"], "h")};
  } else if (file.contains("h_list")) {
    hs = split_list(json_list(file["h_list"], "h_list"));
    if (hs->empty()) throw UsageError("h_list: empty list");
  } else if (cfg.command == Command::order_study) {
    hs = std::vector<std::string>{"0.1", "0.05", "0.025", "0.0125"};
  }
  if (hs) {
    cfg.h_list.clear();
    for (const auto& e : *hs) cfg.h_list.push_back(parse_double(e, "--h"));
  }

  if (auto v = scalar(t_end, "--t-end", "t_end")) cfg.t_end = parse_double(*v, "--t-end");
  if (auto v = list(solvers, "--solver", "solver")) {
    cfg.solvers.clear();
    for (const auto& e : *v) {
      try {
        cfg.solvers.push_back(parse_linear_solver(e));
      } catch (const InvalidInput& ex) {
        throw UsageError(ex.what());
      }
    }
    if (cfg.solvers.empty()) throw UsageError("--solver: empty list");
  }
  if (auto v = list(methods, "--method", "method")) {
    cfg.methods.clear();
    for (const auto& e : *v) {
      try {
        cfg.methods.push_back(parse_nonlinear_method(e));
      } catch (const InvalidInput& ex) {
        throw UsageError(ex.what());
      }
    }
    if (cfg.methods.empty()) throw UsageError("--method: empty list");
  }
  if (auto v = scalar(tol, "--tol", "tol")) {
    try {
      cfg.tol = Tolerance::parse(*v);
    } catch (const InvalidInput& ex) {
      throw UsageError(ex.what());
    }
  }
  if (auto v = scalar(k_max, "--k-max", "k_max")) cfg.k_max = parse_integer(*v, "--k-max");
  if (auto v = scalar(out, "--out", "out")) cfg.out = *v;
  if (auto v = scalar(seed, "--seed", "seed")) {
    const long long sv = parse_integer(*v, "--seed");
    if (sv < 0) throw UsageError("--seed must be nonnegative");
    cfg.seed = static_cast<std::uint64_t>(sv);
  }
  cfg.strict = boolean(strict, "--strict", "strict");
  cfg.timing = boolean(timing, "--timing", "timing");

  validate(cfg);
  return cfg;
}

void validate(const ExperimentConfig& cfg) {
  const bool linear_model = cfg.model == "mass-spring";
  if (!linear_model && cfg.model != "rigid-body") throw UsageError("unknown model '" + cfg.model + "'");
  if (cfg.n < 1) throw UsageError("--n must be at least 1");
  if (!(cfg.mass > 0.0) || !(cfg.spring > 0.0)) throw UsageError("mass and spring constants must be positive");
  for (int s : cfg.s) {
    if (s < 1 || s > kMaxPadeDegree) {
      throw UsageError("--s must lie in [1, " + std::to_string(kMaxPadeDegree) + "], got " + std::to_string(s));
    }
  }
  for (double h : cfg.h_list) {
    if (!(h > 0.0)) throw UsageError("step sizes must be positive");
  }
  if (!(cfg.t_end > 0.0)) throw UsageError("--t-end must be positive");
  if (cfg.k_max < 1) throw UsageError("--k-max must be positive");
  if (cfg.out.empty()) throw UsageError("--out must not be empty");

  switch (cfg.command) {
    case Command::linear_step:
    case Command::integrate:
      if (!linear_model) throw UsageError(to_string(cfg.command) + " requires a linear model (mass-spring)");
      if (cfg.h_list.size() != 1) throw UsageError(to_string(cfg.command) + " takes a single --h");
      break;
    case Command::nonlinear_step:
    case Command::nonlinear_integrate:
      if (linear_model) {
        throw UsageError(to_string(cfg.command) + " requires a state-dependent model (rigid-body)");
      }
      if (cfg.h_list.size() != 1) throw UsageError(to_string(cfg.command) + " takes a single --h");
      break;
    case Command::order_study:
      if (cfg.h_list.size() < 3) throw UsageError("order-study needs at least three step sizes");
      for (double h : cfg.h_list) {
        try {
          uniform_grid(cfg.t_end, h);
        } catch (const InvalidInput& e) {
          throw UsageError(e.what());
        }
      }
      break;
    case Command::pade_audit:
    case Command::export_model:
      break;
  }
  if (cfg.command == Command::integrate || cfg.command == Command::nonlinear_integrate) {
    try {
      uniform_grid(cfg.t_end, cfg.h_list.front());
    } catch (const InvalidInput& e) {
      throw UsageError(e.what());
    }
  }
}

}  // namespace gausskry::cli
