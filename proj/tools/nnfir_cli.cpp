// nnfir: command-line front end for nonnegative FIR estimation.
//
//   nnfir check    U.csv Y.csv
//   nnfir estimate U.csv Y.csv [--max-iters N] [--tol-kkt X] [--init ones|simplex|file:PATH] ...
//   nnfir oracle   U.csv Y.csv [--depth R]
//   nnfir simulate [--h-true 1,0.5,0.25] [--noise gamma:4] [--m-grid 16,64,256,1024] ...
//
// Exit status: 0 success, 1 input or configuration error, 2 precondition failure.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "nnfir/diagnostics.hpp"
#include "nnfir/errors.hpp"
#include "nnfir/fir_operator.hpp"
#include "nnfir/io.hpp"
#include "nnfir/oracles.hpp"
#include "nnfir/solver.hpp"
#include "nnfir/stats.hpp"

using nlohmann::json;
using namespace nnfir;

namespace {

struct DataPair {
  NonnegMatrix U;
  NonnegMatrix Y;
  json inputs;
};

DataPair load_pair(const std::string& u_path, const std::string& y_path) {
  const std::string u_bytes = read_file(u_path);
  const std::string y_bytes = read_file(y_path);
  DataPair d{parse_matrix_csv(u_bytes, u_path), parse_matrix_csv(y_bytes, y_path), {}};
  if (d.U.rows() != d.Y.rows() || d.U.cols() != d.Y.cols()) {
    throw DimensionError("U is " + std::to_string(d.U.rows()) + "x" + std::to_string(d.U.cols()) +
                         " but Y is " + std::to_string(d.Y.rows()) + "x" + std::to_string(d.Y.cols()));
  }
  d.inputs = {{"u", input_json(u_path, u_bytes, d.U)}, {"y", input_json(y_path, y_bytes, d.Y)}};
  return d;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

void emit(const json& doc, const std::string& out_path) {
  const std::string text = doc.dump(2) + "\n";
  if (out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw InputError("cannot write '" + out_path + "'");
  out << text;
}

std::vector<double> parse_list(const std::string& text, const std::string& what) {
  const NonnegMatrix row = parse_matrix_csv(text, what);
  if (row.rows() != 1) throw ConfigError(what + ": expected one comma-separated list");
  return std::vector<double>(row.values().begin(), row.values().end());
}

std::vector<double> read_vector_file(const std::string& path) {
  const NonnegMatrix M = read_matrix_csv(path);
  if (M.cols() != 1 && M.rows() != 1) throw DimensionError(path + ": expected a single row or column");
  return std::vector<double>(M.values().begin(), M.values().end());
}

int run_check(const std::string& u_path, const std::string& y_path) {
  const DataPair d = load_pair(u_path, y_path);
  const ConditionReport rep = check_conditions(d.Y, d.U);
  json doc = to_json(rep);
  doc["schema_version"] = kSchemaVersion;
  doc["kind"] = "check";
  doc["inputs"] = d.inputs;
  std::cout << doc.dump(2) << "\n";
  return rep.well_posed ? 0 : 2;
}

struct EstimateFlags {
  std::size_t max_iters = SolverConfig{}.max_iters;
  double tol_kkt = SolverConfig{}.tol_kkt;
  double tol_objective = SolverConfig{}.tol_objective;
  std::string init = "ones";
  bool verify = false;
  bool history = false;
  std::uint64_t seed = 0;
  std::string out;
};

int run_estimate(const std::string& u_path, const std::string& y_path, const EstimateFlags& f) {
  const auto start = std::chrono::steady_clock::now();
  const DataPair d = load_pair(u_path, y_path);
  SolverConfig cfg;
  cfg.max_iters = f.max_iters;
  cfg.tol_kkt = f.tol_kkt;
  cfg.tol_objective = f.tol_objective;
  cfg.verify_mode = f.verify;
  cfg.record_history = f.history;
  if (f.init == "ones") {
    cfg.init = InitKind::ones;
  } else if (f.init == "simplex") {
    cfg.init = InitKind::uniform_simplex;
  } else if (f.init.rfind("file:", 0) == 0) {
    cfg.init = InitKind::user;
    cfg.init_vector = read_vector_file(f.init.substr(5));
  } else {
    throw ConfigError("--init must be ones, simplex or file:PATH");
  }
  cfg.validate();

  const SolverReport rep = solve(d.Y, d.U, cfg);
  json doc = run_report_body(d.Y, d.U, rep);
  doc["schema_version"] = kSchemaVersion;
  doc["kind"] = "estimate";
  doc["inputs"] = d.inputs;
  doc["config"] = config_json(cfg, f.init);
  doc["config"]["seed"] = f.seed;
  doc["wall_time_seconds"] = seconds_since(start);
  emit(doc, f.out);
  return 0;
}

int run_oracle(const std::string& u_path, const std::string& y_path, std::size_t depth,
               std::size_t points) {
  const auto start = std::chrono::steady_clock::now();
  const DataPair d = load_pair(u_path, y_path);
  BruteForceOptions opts;
  opts.rounds = depth;
  opts.points_per_dim = points;
  const BruteForceResult bf = brute_force_minimize(d.Y, d.U, opts);
  SolverConfig cfg;
  cfg.tol_kkt = 1e-10;
  const SolverReport rep = solve(d.Y, d.U, cfg);
  const double F_solver = objective(d.Y, d.U, rep.h_final);
  double h_gap = 0.0;
  for (std::size_t k = 0; k < bf.h.size(); ++k) h_gap = std::max(h_gap, std::abs(bf.h[k] - rep.h_final[k]));
  const double F_gap = std::abs(F_solver - bf.objective);

  json doc;
  doc["schema_version"] = kSchemaVersion;
  doc["kind"] = "oracle";
  doc["inputs"] = d.inputs;
  doc["depth"] = depth;
  doc["points_per_dim"] = points;
  doc["brute_force"] = {{"h", std::vector<double>(bf.h.values().begin(), bf.h.values().end())},
                        {"objective", bf.objective},
                        {"evaluations", bf.evaluations}};
  doc["solver"] = {{"h", std::vector<double>(rep.h_final.values().begin(), rep.h_final.values().end())},
                   {"objective", F_solver},
                   {"termination", to_string(rep.termination)},
                   {"iterations_used", rep.iterations_used}};
  doc["objective_gap"] = F_gap;
  doc["h_gap"] = h_gap;
  doc["strictly_convex"] = check_conditions(d.Y, d.U).strictly_convex;
  doc["agree"] = F_gap <= 1e-6 && h_gap <= 1e-4;
  doc["wall_time_seconds"] = seconds_since(start);
  std::cout << doc.dump(2) << "\n";
  return 0;
}

struct SimulateFlags {
  std::string h_true = "1,0.5,0.25";
  std::string noise = "gamma:4";
  std::string m_grid = "16,64,256,1024";
  std::size_t replicates = 20;
  std::uint64_t seed = 1;
  std::size_t normality_m = 0;
  std::size_t normality_replicates = 500;
  std::size_t decomposition_samples = 0;
  std::size_t threads = 1;
  std::string out;
};

int run_simulate(const SimulateFlags& f) {
  const auto start = std::chrono::steady_clock::now();
  const ImpulseResponse h_true(parse_list(f.h_true, "--h-true"));
  const NoiseModel noise = parse_noise(f.noise);
  std::vector<std::size_t> grid;
  for (double v : parse_list(f.m_grid, "--m-grid")) {
    if (v < 1.0 || v != std::floor(v)) throw ConfigError("--m-grid entries must be positive integers");
    grid.push_back(static_cast<std::size_t>(v));
  }
  if (f.replicates == 0) throw ConfigError("--replicates must be positive");
  if (f.threads == 0) throw ConfigError("--threads must be positive");
  const InputLaw law;

  json doc;
  doc["schema_version"] = kSchemaVersion;
  doc["kind"] = "simulate";
  doc["config"] = {{"h_true", std::vector<double>(h_true.values().begin(), h_true.values().end())},
                   {"noise", noise.describe()},
                   {"e_delta_log_delta", noise.e_delta_log_delta()},
                   {"input_law", {{"low", law.low}, {"high", law.high}}},
                   {"m_grid", grid},
                   {"replicates", f.replicates},
                   {"seed", f.seed},
                   {"normality_m", f.normality_m},
                   {"normality_replicates", f.normality_replicates},
                   {"decomposition_samples", f.decomposition_samples}};
  doc["consistency"] = to_json(consistency_experiment(h_true, law, noise, grid, f.replicates, f.seed, f.threads));
  if (f.normality_m > 0) {
    doc["normality"] = to_json(
        normality_experiment(h_true, law, noise, f.normality_m, f.normality_replicates, f.seed, f.threads));
  }
  if (f.decomposition_samples > 0) {
    std::vector<double> probe(h_true.values().begin(), h_true.values().end());
    for (double& v : probe) v *= 1.25;
    doc["decomposition"] = to_json(limit_criterion_decomposition_check(
        h_true, law, noise, ImpulseResponse(probe), f.decomposition_samples, f.seed));
  }
  doc["wall_time_seconds"] = seconds_since(start);
  emit(doc, f.out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Nonnegative FIR estimation by I-divergence minimization"};
  app.require_subcommand(1);

  std::string u_path, y_path;
  auto add_pair = [&](CLI::App* sub) {
    sub->add_option("u", u_path, "input matrix CSV (rows = time, columns = experiments)")
        ->required()
        ->check(CLI::ExistingFile);
    sub->add_option("y", y_path, "output matrix CSV, same shape as u")->required()->check(CLI::ExistingFile);
  };

  auto* check = app.add_subcommand("check", "report well-posedness and strict convexity");
  add_pair(check);

  EstimateFlags ef;
  auto* estimate = app.add_subcommand("estimate", "run the multiplicative update and print a report");
  add_pair(estimate);
  estimate->add_option("--max-iters", ef.max_iters, "iteration cap")->capture_default_str();
  estimate->add_option("--tol-kkt", ef.tol_kkt, "stop when the KKT violation is below this")->capture_default_str();
  estimate->add_option("--tol-objective", ef.tol_objective, "relative decrease counted as a stall")
      ->capture_default_str();
  estimate->add_option("--init", ef.init, "ones, simplex or file:PATH")->capture_default_str();
  estimate->add_flag("--verify", ef.verify, "check the lifted identities at every step");
  estimate->add_flag("--history", ef.history, "include iterates and the Lyapunov trace");
  estimate->add_option("--seed", ef.seed, "reserved; the solver is deterministic");
  estimate->add_option("--out", ef.out, "write the report here instead of standard output");

  std::size_t depth = BruteForceOptions{}.rounds;
  std::size_t points = BruteForceOptions{}.points_per_dim;
  auto* oracle = app.add_subcommand("oracle", "compare the solver with a brute-force grid search");
  add_pair(oracle);
  oracle->add_option("--depth", depth, "grid refinement rounds")->capture_default_str();
  oracle->add_option("--points", points, "grid points per dimension")->capture_default_str();

  SimulateFlags sf;
  auto* simulate = app.add_subcommand("simulate", "Monte Carlo consistency and normality experiments");
  simulate->add_option("--h-true", sf.h_true, "true impulse response, comma separated")->capture_default_str();
  simulate->add_option("--noise", sf.noise, "gamma:A, lognormal:SIGMA, two-point:LOW,HIGH or point-mass")
      ->capture_default_str();
  simulate->add_option("--m-grid", sf.m_grid, "experiment counts, comma separated")->capture_default_str();
  simulate->add_option("--replicates", sf.replicates, "replicates per grid point")->capture_default_str();
  simulate->add_option("--seed", sf.seed, "master seed")->capture_default_str();
  simulate->add_option("--normality-m", sf.normality_m, "m for the normality screen (0 = skip)")
      ->capture_default_str();
  simulate->add_option("--normality-replicates", sf.normality_replicates, "replicates for the normality screen")
      ->capture_default_str();
  simulate->add_option("--decomposition-samples", sf.decomposition_samples,
                       "Monte Carlo samples for the criterion decomposition (0 = skip)")
      ->capture_default_str();
  simulate->add_option("--threads", sf.threads, "worker threads")->capture_default_str();
  simulate->add_option("--out", sf.out, "write the report here instead of standard output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (*check) return run_check(u_path, y_path);
    if (*estimate) return run_estimate(u_path, y_path, ef);
    if (*oracle) return run_oracle(u_path, y_path, depth, points);
    if (*simulate) return run_simulate(sf);
  } catch (const PreconditionError& e) {
    std::cerr << "nnfir: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "nnfir: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
