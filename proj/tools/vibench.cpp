// vibench: run VI solvers on registered problems, write per-iteration traces
// (CSV) and run summaries (JSON), validate the chain hard instance, and fit
// convergence exponents over iteration grids.
//
// Exit codes: 0 success; 1 invariant violation, subsolver failure, or failed
// validation; 2 bad usage / config / registry lookups.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "perseus/baselines.hpp"
#include "perseus/hard_instance.hpp"
#include "perseus/metrics.hpp"
#include "perseus/problems.hpp"
#include "perseus/ratefit.hpp"
#include "perseus/restart.hpp"
#include "perseus/solver.hpp"

namespace {

using nlohmann::json;
using namespace perseus;

struct ConfigParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct UnknownMethod : std::runtime_error {
  explicit UnknownMethod(const std::string& m)
      : std::runtime_error("unknown method '" + m + "' (expected perseus, perseus-restart, eg, de)") {}
};

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt_or_empty(double v) { return std::isfinite(v) ? fmt(v) : std::string(); }

// Everything needed to execute one (problem, method, T) cell.
struct RunSpec {
  std::string problem_name;
  std::map<std::string, double> params;
  std::string method = "perseus";
  int p = 1;
  double L = 0.0;      // 0: use the constant recorded by the problem, if any
  int T = 100;
  int opt = 0;
  unsigned seed = 20240904u;
  double step = 0.0;   // baselines; 0: eg 1/(2L), de 1/L
  double sigma = 0.0;  // restart; 0: problem modulus
  double stop_rel = -1.0;
  int inner_budget = 0;
  bool checks = true;
  bool corrupt_lambda = false;  // test hook: damage one lambda before checks
};

double resolve_L(const VIProblem& problem, const RunSpec& spec) {
  if (spec.L > 0) return spec.L;
  auto it = problem.smoothness.find(spec.p);
  if (it == problem.smoothness.end()) {
    throw InvalidSpec("problem '" + spec.problem_name + "' records no smoothness constant for p=" +
                      std::to_string(spec.p) + "; pass --L");
  }
  return it->second;
}

void apply_corruption(SolveResult& result) {
  if (result.trace.empty()) return;
  result.trace[result.trace.size() / 2].lambda *= 1.5;
}

struct RunOutcome {
  SolveResult result;
  LemmaChecks checks;
  bool checks_apply = false;
  double L = 0.0;
};

RunOutcome execute(const VIProblem& problem, const RunSpec& spec) {
  RunOutcome out;
  out.L = resolve_L(problem, spec);

  ToleranceSet tol;
  if (spec.stop_rel >= 0) tol.stop_residue_rel = spec.stop_rel;
  if (spec.inner_budget > 0) tol.inner_budget = spec.inner_budget;

  if (spec.method == "perseus") {
    SolverConfig config;
    config.order_p = spec.p;
    config.lipschitz_L = out.L;
    config.iterations_T = spec.T;
    config.opt = spec.opt;
    config.seed = spec.seed;
    config.tolerances = tol;
    out.result = perseus_run(problem, config);
    if (spec.corrupt_lambda) apply_corruption(out.result);
    if (spec.checks) {
      out.checks = run_lemma_checks(problem, config, out.result);
      out.checks_apply = true;
    }
    return out;
  }

  if (spec.method == "perseus-restart") {
    double sigma = spec.sigma;
    if (sigma <= 0) sigma = problem.modulus;
    if (sigma <= 0) {
      throw InvalidSpec("restart needs a positive modulus; pass --sigma or use a strongly "
                        "monotone / strong-Minty problem");
    }
    RestartResult rr =
        perseus_restart_run(problem, spec.p, out.L, sigma, 0.0, spec.T, spec.opt, std::nullopt, tol);

    // flatten epochs into one trace with a continuous iteration index
    out.result.status = rr.status;
    out.result.output = rr.output;
    out.result.note = "epochs=" + std::to_string(rr.epochs.size());
    int k = 0;
    SolverConfig config;  // only p and L matter to the checks
    config.order_p = spec.p;
    config.lipschitz_L = out.L;
    config.opt = spec.opt;
    bool first = true;
    out.checks_apply = spec.checks;
    for (auto& inner : rr.inner_runs) {
      if (first) {
        out.result.x0 = inner.x0;
        first = false;
      }
      out.result.sum_lambda += inner.sum_lambda;
      out.result.s_final = inner.s_final;
      if (spec.checks) {
        const LemmaChecks c = run_lemma_checks(problem, config, inner);
        out.checks.bracket = out.checks.bracket && c.bracket;
        out.checks.lemma1 = out.checks.lemma1 && c.lemma1;
        out.checks.lemma2a = out.checks.lemma2a && c.lemma2a;
        out.checks.lemma2b = out.checks.lemma2b && c.lemma2b;
        out.checks.lemma3 = out.checks.lemma3 && c.lemma3;
      }
      for (auto& rec : inner.trace) {
        rec.k = ++k;
        out.result.trace.push_back(std::move(rec));
      }
    }
    if (spec.corrupt_lambda) {
      apply_corruption(out.result);
      if (spec.checks) {
        // recheck the flattened trace's bracket after the corruption
        const LemmaChecks c = run_lemma_checks(problem, config, out.result);
        out.checks.bracket = out.checks.bracket && c.bracket;
      }
    }
    return out;
  }

  if (spec.method == "eg" || spec.method == "de") {
    BaselineConfig config;
    config.method =
        spec.method == "eg" ? BaselineMethod::Extragradient : BaselineMethod::DualExtrapolation;
    config.step = spec.step > 0 ? spec.step
                                : (spec.method == "eg" ? 1.0 / (2.0 * out.L) : 1.0 / out.L);
    config.iterations = spec.T;
    config.tolerances = tol;
    out.result = baseline_run(problem, config);
    // lemma checks quantify over certified steps; baselines have none
    return out;
  }

  throw UnknownMethod(spec.method);
}

void write_trace_csv(const std::filesystem::path& path, const VIProblem& problem,
                     const SolveResult& result) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << "k,lambda,r,inner_iters,sub_residue,sub_threshold,residue,gap,dist_to_xstar,wall_ns\n";
  for (const auto& rec : result.trace) {
    os << rec.k << ',' << fmt(rec.lambda) << ',' << fmt(rec.r) << ',';
    if (rec.certificate) {
      os << rec.certificate->inner_iterations << ',' << fmt(rec.certificate->residue) << ','
         << fmt(rec.certificate->threshold) << ',';
    } else {
      os << ",,,";
    }
    os << fmt_or_empty(rec.residue) << ',';
    if (problem.saddle && rec.x.size() > 0) {
      os << fmt(gap_saddle(problem, rec.x));
    }
    os << ',';
    if (problem.known_solution && rec.x.size() > 0) {
      os << fmt((rec.x - *problem.known_solution).norm());
    }
    os << ',' << rec.wall_ns << '\n';
  }
}

json summary_json(const VIProblem& problem, const RunSpec& spec, const RunOutcome& run) {
  json j;
  j["problem"] = spec.problem_name;
  j["method"] = spec.method;
  j["p"] = spec.p;
  j["L"] = run.L;
  j["T"] = spec.T;
  j["opt"] = spec.opt;
  j["status"] = to_string(run.result.status);
  j["output_metric_residue"] = residue(problem, run.result.output);
  if (problem.saddle) {
    j["output_metric_gap"] = gap_saddle(problem, run.result.output);
  } else {
    j["output_metric_gap"] = nullptr;
  }
  j["sum_lambda"] = run.result.sum_lambda;
  j["lemma_checks"] = {{"lemma1", run.checks.lemma1},
                       {"lemma2a", run.checks.lemma2a},
                       {"lemma2b", run.checks.lemma2b},
                       {"lemma3", run.checks.lemma3},
                       {"bracket", run.checks.bracket}};
  return j;
}

// returns the process exit code contribution and fills metric_out for fits
int run_cell(const RunSpec& spec, const std::filesystem::path& out_dir, const std::string& tag,
             double* metric_out, const std::string& fit_metric) {
  const VIProblem problem = make_problem(spec.problem_name, spec.params);
  const RunOutcome run = execute(problem, spec);

  std::filesystem::create_directories(out_dir);
  const std::string suffix = tag.empty() ? "" : "_" + tag;
  write_trace_csv(out_dir / ("trace" + suffix + ".csv"), problem, run.result);
  const json j = summary_json(problem, spec, run);
  std::ofstream(out_dir / ("summary" + suffix + ".json")) << j.dump(2) << '\n';

  if (metric_out) {
    if (fit_metric == "gap" && !j["output_metric_gap"].is_null()) {
      *metric_out = j["output_metric_gap"].get<double>();
    } else {
      *metric_out = j["output_metric_residue"].get<double>();
    }
  }

  std::cout << tag << (tag.empty() ? "" : ": ") << "status=" << to_string(run.result.status)
            << " residue=" << fmt(j["output_metric_residue"].get<double>());
  if (!j["output_metric_gap"].is_null()) {
    std::cout << " gap=" << fmt(j["output_metric_gap"].get<double>());
  }
  std::cout << '\n';

  if (run.result.status == SolveStatus::SubsolverFailure) {
    std::cerr << "subsolver failed: " << run.result.note << '\n';
    return 1;
  }
  if (run.checks_apply && !run.checks.all()) {
    std::cerr << "invariant violation: bracket=" << run.checks.bracket
              << " lemma1=" << run.checks.lemma1 << " lemma2a=" << run.checks.lemma2a
              << " lemma2b=" << run.checks.lemma2b << " lemma3=" << run.checks.lemma3 << '\n';
    return 1;
  }
  return 0;
}

// --- config file handling (flat key = value lines, # comments) -------------

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::map<std::string, std::string> parse_config_file(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigParseError("cannot open config '" + path.string() + "'");
  std::map<std::string, std::string> kv;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigParseError("line " + std::to_string(lineno) + ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigParseError("line " + std::to_string(lineno) + ": empty key");
    if (kv.count(key)) throw ConfigParseError("duplicate key '" + key + "'");
    kv[key] = value;
  }
  return kv;
}

double to_double(const std::string& key, const std::string& v) {
  try {
    size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigParseError("key '" + key + "': cannot parse number '" + v + "'");
  }
}

int to_int(const std::string& key, const std::string& v) {
  const double d = to_double(key, v);
  if (d != std::floor(d)) throw ConfigParseError("key '" + key + "': expected integer, got " + v);
  return static_cast<int>(d);
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "on" || v == "true" || v == "1") return true;
  if (v == "off" || v == "false" || v == "0") return false;
  throw ConfigParseError("key '" + key + "': expected on/off, got '" + v + "'");
}

int run_bench(const std::filesystem::path& config_path) {
  auto kv = parse_config_file(config_path);
  auto take = [&kv](const std::string& key) -> std::optional<std::string> {
    auto it = kv.find(key);
    if (it == kv.end()) return std::nullopt;
    std::string v = it->second;
    kv.erase(it);
    return v;
  };

  RunSpec spec;
  if (auto v = take("problem")) spec.problem_name = *v;
  else throw ConfigParseError("missing required key 'problem'");
  if (auto v = take("method")) spec.method = *v;
  if (auto v = take("p")) spec.p = to_int("p", *v);
  if (auto v = take("L")) spec.L = to_double("L", *v);
  if (auto v = take("opt")) spec.opt = to_int("opt", *v);
  if (auto v = take("seed")) spec.seed = static_cast<unsigned>(to_int("seed", *v));
  if (auto v = take("step")) spec.step = to_double("step", *v);
  if (auto v = take("sigma")) spec.sigma = to_double("sigma", *v);
  if (auto v = take("stop_rel")) spec.stop_rel = to_double("stop_rel", *v);
  if (auto v = take("inner_budget")) spec.inner_budget = to_int("inner_budget", *v);
  if (auto v = take("checks")) spec.checks = to_bool("checks", *v);
  if (auto v = take("corrupt_lambda")) spec.corrupt_lambda = to_bool("corrupt_lambda", *v);

  std::string out_dir = "bench-out";
  if (auto v = take("out")) out_dir = *v;
  std::string fit_metric = "gap";
  if (auto v = take("fit_metric")) {
    fit_metric = *v;
    if (fit_metric != "gap" && fit_metric != "residue") {
      throw ConfigParseError("fit_metric must be 'gap' or 'residue'");
    }
  }

  std::vector<int> grid;
  if (auto v = take("T_grid")) {
    std::stringstream ss(*v);
    std::string item;
    while (std::getline(ss, item, ',')) grid.push_back(to_int("T_grid", trim(item)));
    if (grid.empty()) throw ConfigParseError("T_grid is empty");
  }
  if (auto v = take("T")) {
    if (!grid.empty()) throw ConfigParseError("give either T or T_grid, not both");
    spec.T = to_int("T", *v);
  } else if (grid.empty()) {
    throw ConfigParseError("missing required key 'T' (or 'T_grid')");
  }

  // problem parameters arrive as param.<name> = value
  std::vector<std::string> param_keys;
  for (const auto& [k, v] : kv) {
    if (k.rfind("param.", 0) == 0) param_keys.push_back(k);
  }
  for (const auto& k : param_keys) {
    spec.params[k.substr(6)] = to_double(k, kv[k]);
    kv.erase(k);
  }
  if (!kv.empty()) throw ConfigParseError("unknown key '" + kv.begin()->first + "'");

  if (grid.empty()) {
    return run_cell(spec, out_dir, "", nullptr, fit_metric);
  }

  int exit_code = 0;
  std::vector<double> budgets, values;
  for (int T : grid) {
    RunSpec cell = spec;
    cell.T = T;
    double metric = std::numeric_limits<double>::quiet_NaN();
    exit_code |= run_cell(cell, out_dir, "T" + std::to_string(T), &metric, fit_metric);
    budgets.push_back(T);
    values.push_back(metric);
  }

  json fit_json;
  try {
    const RateFit fit = rate_fit(budgets, values, 2);
    fit_json = {{"metric", fit_metric},
                {"slope", fit.slope},
                {"intercept", fit.intercept},
                {"r_squared", fit.r_squared},
                {"window", {budgets.front(), budgets.back()}},
                {"points", fit.window}};
    std::cout << "rate fit: slope=" << fmt(fit.slope) << " r2=" << fmt(fit.r_squared) << '\n';
  } catch (const std::exception& e) {
    fit_json = {{"error", e.what()}};
    std::cerr << "rate fit skipped: " << e.what() << '\n';
  }
  std::ofstream(std::filesystem::path(out_dir) / "ratefit.json") << fit_json.dump(2) << '\n';
  return exit_code;
}

int run_hard_instance(int p, int T_hard, double L, int d, const std::string& coords,
                      bool validate) {
  HardInstanceSpec spec;
  spec.p = p;
  spec.T_hard = T_hard;
  spec.L = L;
  spec.d = d;
  if (coords == "native") {
    spec.coordinates = HardCoordinates::native_z;
  } else if (coords == "box") {
    spec.coordinates = HardCoordinates::box_w;
  } else {
    throw ConfigParseError("--coords must be 'native' or 'box'");
  }
  spec.validate();

  json j;
  j["p"] = spec.p;
  j["T_hard"] = spec.T_hard;
  j["L"] = spec.L;
  j["coordinates"] = coords;
  j["dim"] = coords == "box" ? 4 * spec.T_hard : 2 * spec.block_dim();
  j["optimal_value"] = spec.optimal_value();
  j["bound_DZ"] = spec.bound_DZ();
  j["bound_DY"] = spec.bound_DY();

  bool ok = true;
  if (validate) {
    const HardValidationReport rep = validate_hard_instance(spec);
    j["grad_at_solution_inf"] = rep.grad_at_solution_inf;
    j["value_error"] = rep.value_error;
    j["smoothness_estimate"] = rep.smoothness_estimate;
    j["smoothness_bound"] = rep.smoothness_bound;
    j["monotone_min_inner"] = rep.monotone.min_inner_product;
    try {
      j["restricted_minmax"] = restricted_minmax_value(spec);
    } catch (const BruteForceMismatch& e) {
      j["restricted_minmax_error"] = e.what();
      ok = false;
    }
    ok = ok && rep.grad_at_solution_inf <= 1e-12 && rep.value_error <= 1e-12 &&
         rep.smoothness_estimate <= rep.smoothness_bound * (1.0 + 1e-6) &&
         rep.monotone.monotone();
    j["valid"] = ok;
  }
  std::cout << j.dump(2) << '\n';
  return ok ? 0 : 1;
}

std::map<std::string, double> parse_cli_params(const std::vector<std::string>& items) {
  std::map<std::string, double> params;
  for (const auto& item : items) {
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw ConfigParseError("--param expects k=v, got '" + item + "'");
    }
    const std::string key = item.substr(0, eq);
    if (params.count(key)) throw ConfigParseError("duplicate --param " + key);
    params[key] = to_double(key, item.substr(eq + 1));
  }
  return params;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"variational inequality solver benchmark"};
  app.require_subcommand(1);

  // solve
  auto* solve = app.add_subcommand("solve", "run one method on one problem");
  RunSpec spec;
  std::vector<std::string> raw_params;
  std::string out_dir;
  solve->add_option("--problem", spec.problem_name, "registered problem name")->required();
  solve->add_option("--param", raw_params, "problem parameter k=v (repeatable)");
  solve->add_option("--method", spec.method, "perseus | perseus-restart | eg | de");
  solve->add_option("--p", spec.p, "method order");
  solve->add_option("--L", spec.L, "smoothness constant (default: problem metadata)");
  solve->add_option("--T", spec.T, "iterations (restart: outer epochs)")->required();
  solve->add_option("--opt", spec.opt, "output rule: 0 average, 1 best, 2 last");
  solve->add_option("--seed", spec.seed, "rng seed");
  solve->add_option("--step", spec.step, "baseline step size");
  solve->add_option("--sigma", spec.sigma, "restart modulus (default: problem metadata)");
  solve->add_option("--stop-rel", spec.stop_rel, "relative stop residue (negative: default)");
  solve->add_option("--inner-budget", spec.inner_budget, "subsolver iteration budget");
  solve->add_flag("--no-checks", "skip lemma checks");
  solve->add_flag("--corrupt-lambda", spec.corrupt_lambda,
                  "test hook: corrupt one step weight before the checks");
  solve->add_option("--out", out_dir, "output directory")->required();

  // hard-instance
  auto* hard = app.add_subcommand("hard-instance", "build / validate the chain instance");
  int hp = 2, hT = 1, hd = 0;
  double hL = 1.0;
  std::string hcoords = "native";
  bool hvalidate = false;
  hard->add_option("--p", hp, "order (>= 2)");
  hard->add_option("--T", hT, "chain half-length T");
  hard->add_option("--L", hL, "smoothness constant");
  hard->add_option("--d", hd, "native block dimension (0: minimal)");
  hard->add_option("--coords", hcoords, "native | box");
  hard->add_flag("--validate", hvalidate, "run the correctness report");

  // bench
  auto* bench = app.add_subcommand("bench", "run a config file (flat key = value)");
  std::string config_path;
  bench->add_option("--config", config_path, "config file path")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (solve->parsed()) {
      spec.params = parse_cli_params(raw_params);
      spec.checks = solve->count("--no-checks") == 0;
      return run_cell(spec, out_dir, "", nullptr, "gap");
    }
    if (hard->parsed()) {
      return run_hard_instance(hp, hT, hL, hd, hcoords, hvalidate);
    }
    return run_bench(config_path);
  } catch (const ConfigParseError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const UnknownMethod& e) {
    std::cerr << e.what() << '\n';
    return 2;
  } catch (const UnknownProblem& e) {
    std::cerr << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
