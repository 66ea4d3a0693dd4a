// Copyright 2026 The cvxreg Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <CLI11.hpp>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "cvxreg/admm.hpp"
#include "cvxreg/constraints.hpp"
#include "cvxreg/errors.hpp"
#include "cvxreg/gp_warmstart.hpp"
#include "cvxreg/harness.hpp"
#include "cvxreg/interpolant.hpp"
#include "cvxreg/types.hpp"
#include "cvxreg/version.hpp"

using json = nlohmann::json;
using namespace cvxreg;

namespace {

// Exit codes: 0 success, 2 validation, 3 solver non-convergence (best-effort
// outputs are still written), 4 I/O.
constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitSolver = 3;
constexpr int kExitIo = 4;

class IoFailure : public std::runtime_error {
 public:
  explicit IoFailure(const std::string& what) : std::runtime_error(what) {}
};

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoFailure("cannot open " + path + " for writing");
  out << content;
  if (!out) throw IoFailure("write failed for " + path);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoFailure("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_manifest(const std::string& out_path, const std::string& subcommand,
                    const json& config, const std::vector<std::string>& inputs,
                    const std::vector<std::string>& outputs) {
  json manifest;
  manifest["schema_version"] = kSchemaVersion;
  manifest["version"] = kVersion;
  manifest["subcommand"] = subcommand;
  manifest["config"] = config;
  manifest["inputs"] = inputs;
  manifest["outputs"] = outputs;
  write_file(out_path + ".manifest.json", manifest.dump(2) + "\n");
}

int resolve_workers(int flag_value) {
  if (flag_value > 0) return flag_value;
  if (const char* env = std::getenv("CVXREG_WORKERS")) {
    const int parsed = std::atoi(env);
    if (parsed > 0) return parsed;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

// "inf" (any case) selects the nonsmooth class.
FunctionClass parse_class(double mu, const std::string& L_token) {
  std::string lower = L_token;
  for (char& c : lower) c = static_cast<char>(std::tolower(c));
  if (lower == "inf" || lower == "infinity") {
    return FunctionClass::with_infinite_L(mu);
  }
  std::size_t used = 0;
  double L = 0.0;
  try {
    L = std::stod(L_token, &used);
  } catch (const std::exception&) {
    throw InvalidClassError("cannot parse L value '" + L_token + "'");
  }
  if (used != L_token.size()) {
    throw InvalidClassError("cannot parse L value '" + L_token + "'");
  }
  return FunctionClass(mu, L);
}

std::string class_L_token(const FunctionClass& cls) {
  return cls.has_finite_L() ? fmt17(cls.L()) : std::string("inf");
}

void write_observations_csv(const std::string& path, const ObservationSet& obs) {
  std::ostringstream out;
  for (Eigen::Index k = 0; k < obs.d(); ++k) out << "x_" << k << ",";
  out << "y\n";
  for (Eigen::Index i = 0; i < obs.n(); ++i) {
    for (Eigen::Index k = 0; k < obs.d(); ++k) out << fmt17(obs.site(i)[k]) << ",";
    out << fmt17(obs.value(i)) << "\n";
  }
  write_file(path, out.str());
}

ObservationSet read_observations_csv(const std::string& path) {
  std::istringstream in(read_file(path));
  std::string line;
  if (!std::getline(in, line)) throw IoFailure("empty data file " + path);
  std::size_t columns = 1;
  for (const char c : line) {
    if (c == ',') ++columns;
  }
  if (columns < 2) throw IoFailure("expected at least x_0,y columns in " + path);
  const std::size_t d = columns - 1;

  std::vector<std::vector<double>> points;
  std::vector<double> values;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream cells(line);
    std::string cell;
    while (std::getline(cells, cell, ',')) {
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw IoFailure("bad numeric cell '" + cell + "' in " + path);
      }
    }
    if (row.size() != columns) {
      throw IoFailure("row with " + std::to_string(row.size()) + " cells in " + path);
    }
    values.push_back(row.back());
    row.pop_back();
    points.push_back(std::move(row));
  }
  (void)d;
  return validate_observations(points, values);
}

json model_to_json(const CertifiedModel& model, const PairResidual& worst,
                   double feasibility_tol, const FitResult& fit_result) {
  json doc;
  doc["schema_version"] = kSchemaVersion;
  doc["version"] = kVersion;
  doc["class"]["mu"] = model.function_class().mu();
  if (model.function_class().has_finite_L()) {
    doc["class"]["L"] = model.function_class().L();
  } else {
    doc["class"]["L"] = "inf";
  }
  doc["n"] = model.n();
  doc["d"] = model.d();
  json sites = json::array(), f = json::array(), g = json::array();
  for (Eigen::Index i = 0; i < model.n(); ++i) {
    json site = json::array(), grad = json::array();
    for (Eigen::Index k = 0; k < model.d(); ++k) {
      site.push_back(model.site(i)[k]);
      grad.push_back(model.gradient(i)[k]);
    }
    sites.push_back(site);
    f.push_back(model.value(i));
    g.push_back(grad);
  }
  doc["sites"] = sites;
  doc["f"] = f;
  doc["g"] = g;
  doc["certified"] = model.certified();
  doc["worst_residual"] = {
      {"i", worst.i}, {"j", worst.j}, {"residual", worst.residual}};
  doc["feasibility_tol"] = feasibility_tol;
  doc["trace_summary"] = {{"iterations", fit_result.iterations},
                          {"final_residual", fit_result.final_residual},
                          {"converged", fit_result.converged},
                          {"objective", fit_result.trace.empty()
                                            ? 0.0
                                            : fit_result.trace.back().objective}};
  return doc;
}

CertifiedModel model_from_json(const json& doc) {
  if (!doc.contains("schema_version") ||
      doc["schema_version"].get<int>() != kSchemaVersion) {
    throw IoFailure("unsupported model schema");
  }
  const double mu = doc["class"]["mu"].get<double>();
  const FunctionClass cls =
      doc["class"]["L"].is_string()
          ? FunctionClass::with_infinite_L(mu)
          : FunctionClass(mu, doc["class"]["L"].get<double>());
  const Eigen::Index n = doc["n"].get<Eigen::Index>();
  const Eigen::Index d = doc["d"].get<Eigen::Index>();
  SiteMatrix sites(d, n), grads(d, n);
  Eigen::VectorXd values(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index k = 0; k < d; ++k) {
      sites(k, i) = doc["sites"][i][k].get<double>();
      grads(k, i) = doc["g"][i][k].get<double>();
    }
    values[i] = doc["f"][i].get<double>();
  }
  CertifiedModel model(sites, values, grads, cls);
  model.set_certified(doc.value("certified", false));
  return model;
}

std::string sibling_with_extension(const std::string& path, const std::string& ext) {
  const std::size_t dot = path.find_last_of('.');
  const std::size_t slash = path.find_last_of('/');
  if (dot != std::string::npos && (slash == std::string::npos || dot > slash)) {
    return path.substr(0, dot) + ext;
  }
  return path + ext;
}

// ---------------------------------------------------------------------------
// synth

struct SynthArgs {
  long n = 25;
  double sigma = 0.1;
  std::uint64_t seed = 0;
  std::string out;
};

int run_synth(const SynthArgs& args) {
  const ObservationSet obs = synth_quadratic(args.n, args.sigma, args.seed);
  write_observations_csv(args.out, obs);
  json config = {{"n", args.n},
                 {"sigma", args.sigma},
                 {"seed", args.seed},
                 {"out", args.out}};
  write_manifest(args.out, "synth", config, {}, {args.out});
  std::printf("wrote %ld observations to %s\n", static_cast<long>(obs.n()),
              args.out.c_str());
  return kExitOk;
}

// ---------------------------------------------------------------------------
// fit

struct FitArgs {
  std::string in;
  double mu = 1.0;
  std::string L = "5";
  double rho = 0.0;  // 0 = auto (1/n)
  double eps = 0.01;
  long max_iters = 100000;
  std::string warm_start = "gp";
  std::string z_update = "exact";
  int workers = 0;  // 0 = auto
  double newton_tol = 1e-9;
  int max_newton_iters = 50;
  double feasibility_tol = kDefaultFeasibilityTol;
  double gp_ell = 0.0;         // 0 = heuristic
  double gp_signal_var = 0.0;  // 0 = heuristic
  double gp_noise_var = -1.0;  // <0 = heuristic
  std::string out;
};

struct FitOutcome {
  int exit_code = kExitOk;
  bool certified = false;
};

FitOutcome run_fit(const FitArgs& args) {
  const ObservationSet obs = read_observations_csv(args.in);
  const FunctionClass cls = parse_class(args.mu, args.L);
  if (args.warm_start != "gp" && args.warm_start != "none") {
    throw Error("--warm-start must be 'gp' or 'none'");
  }
  if (args.z_update != "exact" && args.z_update != "paper") {
    throw Error("--z-update must be 'exact' or 'paper'");
  }

  AdmmConfig config;
  config.rho = args.rho > 0.0
                   ? args.rho
                   : 1.0 / static_cast<double>(obs.n());
  config.eps = args.eps;
  config.max_iters = static_cast<int>(args.max_iters);
  config.z_update_mode = args.z_update == "exact" ? ZUpdateMode::ExactAverage
                                                  : ZUpdateMode::PaperFaithful;
  config.newton_tol = args.newton_tol;
  config.max_newton_iters = args.max_newton_iters;
  config.workers = resolve_workers(args.workers);

  std::optional<Eigen::MatrixXd> warm;
  double gp_ell = 0.0, gp_signal = 0.0, gp_noise = 0.0;
  if (args.warm_start == "gp") {
    GpConfig gp;
    if (args.gp_ell > 0.0) gp.lengthscale = args.gp_ell;
    if (args.gp_signal_var > 0.0) gp.signal_var = args.gp_signal_var;
    if (args.gp_noise_var >= 0.0) gp.noise_var = args.gp_noise_var;
    warm = initial_consensus(obs, gp);
    // Materialize the heuristics so the manifest pins what actually ran.
    {
      GpConfig resolved = gp;
      if (!resolved.lengthscale.has_value() || !resolved.signal_var.has_value() ||
          !resolved.noise_var.has_value()) {
        std::vector<double> dists;
        for (Eigen::Index i = 0; i < obs.n(); ++i) {
          for (Eigen::Index j = i + 1; j < obs.n(); ++j) {
            dists.push_back((obs.site(i) - obs.site(j)).norm());
          }
        }
        std::sort(dists.begin(), dists.end());
        const double mean = obs.values().mean();
        double var = (obs.values().array() - mean).square().sum() /
                     static_cast<double>(obs.n());
        if (!(var > 0.0)) var = 1.0;
        if (!resolved.lengthscale.has_value()) {
          resolved.lengthscale = dists[dists.size() / 2];
        }
        if (!resolved.signal_var.has_value()) resolved.signal_var = var;
        if (!resolved.noise_var.has_value()) {
          resolved.noise_var = 0.01 * *resolved.signal_var;
        }
      }
      gp_ell = *resolved.lengthscale;
      gp_signal = *resolved.signal_var;
      gp_noise = *resolved.noise_var;
    }
  }

  const auto tic = std::chrono::steady_clock::now();
  FitResult result = fit(obs, cls, config, warm);
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - tic).count();

  const CertifyResult cert = certify(result.model, args.feasibility_tol);
  const json doc =
      model_to_json(result.model, cert.worst, args.feasibility_tol, result);
  write_file(args.out, doc.dump(2) + "\n");

  json config_json = {{"in", args.in},
                      {"mu", args.mu},
                      {"L", class_L_token(cls)},
                      {"rho", *config.rho},
                      {"eps", config.eps},
                      {"max_iters", args.max_iters},
                      {"warm_start", args.warm_start},
                      {"z_update", args.z_update},
                      {"workers", config.workers},
                      {"newton_tol", config.newton_tol},
                      {"max_newton_iters", config.max_newton_iters},
                      {"feasibility_tol", args.feasibility_tol},
                      {"out", args.out}};
  if (args.warm_start == "gp") {
    config_json["gp_ell"] = gp_ell;
    config_json["gp_signal_var"] = gp_signal;
    config_json["gp_noise_var"] = gp_noise;
  }
  write_manifest(args.out, "fit", config_json, {args.in}, {args.out});

  std::printf("fit: %ld iterations, residual %.3e, %s, certified=%s, %.2fs\n",
              result.iterations, result.final_residual,
              result.converged ? "converged" : "NOT converged",
              cert.feasible ? "true" : "false", seconds);
  FitOutcome outcome;
  outcome.certified = cert.feasible;
  outcome.exit_code = result.converged ? kExitOk : kExitSolver;
  return outcome;
}

// ---------------------------------------------------------------------------
// eval

struct EvalArgs {
  std::string model;
  std::vector<double> range{-1.0, 1.0};
  int ns = 1000;
  std::string true_fn = "none";
  std::string out;
};

int run_eval(const EvalArgs& args) {
  if (args.range.size() != 2 || !(args.range[0] < args.range[1])) {
    throw Error("--range needs two increasing bounds");
  }
  if (args.ns < 2) throw Error("--ns must be at least 2");
  if (args.true_fn != "none" && args.true_fn != "x2") {
    throw Error("--true-fn must be 'x2' or 'none'");
  }
  const json doc = json::parse(read_file(args.model), nullptr, true);
  const CertifiedModel model = model_from_json(doc);
  if (model.d() != 1) {
    throw Error("eval grids are one-dimensional; model has d = " +
                std::to_string(model.d()));
  }
  const Interpolant interp = build_interpolant(model);

  const bool with_truth = args.true_fn == "x2";
  std::vector<double> xs(static_cast<std::size_t>(args.ns));
  std::vector<double> phi(static_cast<std::size_t>(args.ns));
  std::vector<bool> ok(static_cast<std::size_t>(args.ns), true);
  bool all_converged = true;
  Eigen::VectorXd x(1);
  for (int s = 0; s < args.ns; ++s) {
    x[0] = args.range[0] + (args.range[1] - args.range[0]) * double(s) /
                               double(args.ns - 1);
    const EvalDetail detail = evaluate_detailed(interp, x);
    xs[static_cast<std::size_t>(s)] = x[0];
    phi[static_cast<std::size_t>(s)] = detail.value;
    ok[static_cast<std::size_t>(s)] = detail.converged;
    all_converged = all_converged && detail.converged;
  }

  std::ostringstream out;
  out << "x,phi_hat";
  if (with_truth) out << ",phi_true";
  if (!all_converged) out << ",flag";
  out << "\n";
  double metric = 0.0;
  for (int s = 0; s < args.ns; ++s) {
    const std::size_t k = static_cast<std::size_t>(s);
    out << fmt17(xs[k]) << "," << fmt17(phi[k]);
    if (with_truth) {
      const double truth = quadratic_truth(xs[k]);
      out << "," << fmt17(truth);
      metric += (phi[k] - truth) * (phi[k] - truth);
    }
    if (!all_converged) out << "," << (ok[k] ? 0 : 1);
    out << "\n";
  }
  write_file(args.out, out.str());

  if (with_truth) {
    metric /= double(args.ns);
    json sidecar = {{"schema_version", kSchemaVersion},
                    {"e_metric", metric},
                    {"range", {args.range[0], args.range[1]}},
                    {"ns", args.ns},
                    {"true_fn", args.true_fn}};
    write_file(sibling_with_extension(args.out, ".metric.json"),
               sidecar.dump(2) + "\n");
  }

  json config = {{"model", args.model},
                 {"range", {args.range[0], args.range[1]}},
                 {"ns", args.ns},
                 {"true_fn", args.true_fn},
                 {"out", args.out}};
  std::vector<std::string> outputs{args.out};
  if (with_truth) outputs.push_back(sibling_with_extension(args.out, ".metric.json"));
  write_manifest(args.out, "eval", config, {args.model}, outputs);

  if (with_truth) std::printf("E metric: %s\n", fmt17(metric).c_str());
  return all_converged ? kExitOk : kExitSolver;
}

// ---------------------------------------------------------------------------
// bench

struct BenchArgs {
  std::vector<long> n_list{25, 50, 100, 200};
  int seeds = 10;
  double sigma = 0.1;
  std::vector<double> eps_list{0.03, 0.01};
  double mu = 1.0;
  std::string L = "5";
  long max_iters = 100000;
  int workers = 0;
  std::string timing = "measure";
  std::string out;
};

std::string bench_csv(const std::vector<BenchRecord>& records, bool zero_timing) {
  std::ostringstream out;
  out << "n,method,iters,residual,time_total_s,time_per_iter_s,E_metric\n";
  for (const BenchRecord& rec : records) {
    out << rec.n << "," << rec.method << "," << rec.iters << ","
        << fmt17(rec.residual) << ","
        << fmt17(zero_timing ? 0.0 : rec.time_total_s) << ","
        << fmt17(zero_timing ? 0.0 : rec.time_per_iter_s) << ","
        << fmt17(rec.e_metric) << "\n";
  }
  return out.str();
}

int run_bench(const BenchArgs& args) {
  if (args.timing != "measure" && args.timing != "zero") {
    throw Error("--timing must be 'measure' or 'zero'");
  }
  const FunctionClass cls = parse_class(args.mu, args.L);
  const int workers = resolve_workers(args.workers);

  std::vector<ExperimentConfig> configs;
  for (const long n : args.n_list) {
    for (const double eps : args.eps_list) {
      for (int seed = 0; seed < args.seeds; ++seed) {
        ExperimentConfig cfg;
        cfg.n = n;
        cfg.noise_sigma = args.sigma;
        cfg.function_class = cls;
        cfg.seed = static_cast<std::uint64_t>(seed);
        cfg.admm.eps = eps;
        cfg.admm.max_iters = static_cast<int>(args.max_iters);
        cfg.admm.workers = workers;
        std::ostringstream tag;
        tag << "admm-eps" << eps;
        cfg.method_tag = tag.str();
        configs.push_back(cfg);
      }
    }
  }
  const std::vector<BenchRecord> records = bench_scaling(configs);

  const bool zero = args.timing == "zero";
  write_file(args.out, bench_csv(records, zero));
  json array = json::array();
  for (const BenchRecord& rec : records) {
    array.push_back({{"n", rec.n},
                     {"method", rec.method},
                     {"iters", rec.iters},
                     {"residual", rec.residual},
                     {"time_total_s", zero ? 0.0 : rec.time_total_s},
                     {"time_per_iter_s", zero ? 0.0 : rec.time_per_iter_s},
                     {"E_metric", rec.e_metric}});
  }
  write_file(sibling_with_extension(args.out, ".json"), array.dump(2) + "\n");

  json config = {{"n_list", args.n_list}, {"seeds", args.seeds},
                 {"sigma", args.sigma},   {"eps_list", args.eps_list},
                 {"mu", args.mu},         {"L", class_L_token(cls)},
                 {"max_iters", args.max_iters},
                 {"workers", workers},    {"timing", args.timing},
                 {"out", args.out}};
  write_manifest(args.out, "bench", config, {},
                 {args.out, sibling_with_extension(args.out, ".json")});
  std::printf("wrote %zu bench records to %s\n", records.size(), args.out.c_str());
  return kExitOk;
}

// ---------------------------------------------------------------------------
// report

struct ReportArgs {
  std::string in;
  std::string out;
};

int run_report(const ReportArgs& args) {
  std::istringstream in(read_file(args.in));
  std::string line;
  if (!std::getline(in, line) ||
      line != "n,method,iters,residual,time_total_s,time_per_iter_s,E_metric") {
    throw IoFailure("unrecognized bench records header in " + args.in);
  }
  struct Bucket {
    long runs = 0;
    double iters = 0, residual = 0, total = 0, per_iter = 0, metric = 0;
  };
  std::vector<std::pair<std::pair<int, std::string>, Bucket>> groups;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream cells(line);
    std::string cell;
    std::vector<std::string> row;
    while (std::getline(cells, cell, ',')) row.push_back(cell);
    if (row.size() != 7) throw IoFailure("bad bench row: " + line);
    const std::pair<int, std::string> key{std::stoi(row[0]), row[1]};
    Bucket* bucket = nullptr;
    for (auto& [k, b] : groups) {
      if (k == key) bucket = &b;
    }
    if (bucket == nullptr) {
      groups.emplace_back(key, Bucket{});
      bucket = &groups.back().second;
    }
    bucket->runs += 1;
    bucket->iters += std::stod(row[2]);
    bucket->residual += std::stod(row[3]);
    bucket->total += std::stod(row[4]);
    bucket->per_iter += std::stod(row[5]);
    bucket->metric += std::stod(row[6]);
  }
  std::ostringstream out;
  out << "n,method,runs,iters_mean,residual_mean,time_total_s_mean,"
         "time_per_iter_s_mean,E_metric_mean\n";
  for (const auto& [key, b] : groups) {
    const double r = static_cast<double>(b.runs);
    out << key.first << "," << key.second << "," << b.runs << ","
        << fmt17(b.iters / r) << "," << fmt17(b.residual / r) << ","
        << fmt17(b.total / r) << "," << fmt17(b.per_iter / r) << ","
        << fmt17(b.metric / r) << "\n";
  }
  write_file(args.out, out.str());
  json config = {{"in", args.in}, {"out", args.out}};
  write_manifest(args.out, "report", config, {args.in}, {args.out});
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Shape-constrained least-squares regression over smooth strongly "
               "convex function classes"};
  app.require_subcommand(1);

  SynthArgs synth_args;
  CLI::App* synth = app.add_subcommand("synth", "generate noisy quadratic samples");
  synth->add_option("--n", synth_args.n, "number of observations (>= 2)");
  synth->add_option("--sigma", synth_args.sigma, "noise standard deviation");
  synth->add_option("--seed", synth_args.seed, "RNG seed");
  synth->add_option("--out", synth_args.out, "output CSV path")->required();

  FitArgs fit_args;
  CLI::App* fit_cmd = app.add_subcommand("fit", "fit a model to a data CSV");
  fit_cmd->add_option("--in", fit_args.in, "input CSV (x_0..x_{d-1},y)")->required();
  fit_cmd->add_option("--mu", fit_args.mu, "strong convexity modulus");
  fit_cmd->add_option("--L", fit_args.L, "smoothness constant or 'inf'");
  fit_cmd->add_option("--rho", fit_args.rho, "penalty (default 1/n)");
  fit_cmd->add_option("--eps", fit_args.eps, "stopping threshold");
  fit_cmd->add_option("--max-iters", fit_args.max_iters, "iteration cap");
  fit_cmd->add_option("--warm-start", fit_args.warm_start, "gp|none");
  fit_cmd->add_option("--z-update", fit_args.z_update, "exact|paper");
  fit_cmd->add_option("--workers", fit_args.workers,
                      "edge-sweep threads (default: machine parallelism)");
  fit_cmd->add_option("--newton-tol", fit_args.newton_tol, "inner dual tolerance");
  fit_cmd->add_option("--max-newton-iters", fit_args.max_newton_iters,
                      "inner iteration cap");
  fit_cmd->add_option("--feas-tol", fit_args.feasibility_tol,
                      "certification tolerance");
  fit_cmd->add_option("--gp-ell", fit_args.gp_ell, "GP lengthscale override");
  fit_cmd->add_option("--gp-signal-var", fit_args.gp_signal_var,
                      "GP signal variance override");
  fit_cmd->add_option("--gp-noise-var", fit_args.gp_noise_var,
                      "GP noise variance override");
  fit_cmd->add_option("--out", fit_args.out, "output model JSON")->required();

  EvalArgs eval_args;
  CLI::App* eval_cmd = app.add_subcommand("eval", "evaluate a model on a grid");
  eval_cmd->add_option("--model", eval_args.model, "model JSON path")->required();
  eval_cmd->add_option("--range", eval_args.range, "grid bounds a b")
      ->expected(2);
  eval_cmd->add_option("--ns", eval_args.ns, "grid size (default 1000)");
  eval_cmd->add_option("--true-fn", eval_args.true_fn, "x2|none");
  eval_cmd->add_option("--out", eval_args.out, "output grid CSV")->required();

  BenchArgs bench_args;
  CLI::App* bench_cmd = app.add_subcommand("bench", "scaling/accuracy records");
  bench_cmd->add_option("--n-list", bench_args.n_list, "observation counts");
  bench_cmd->add_option("--seeds", bench_args.seeds, "seed count per config");
  bench_cmd->add_option("--sigma", bench_args.sigma, "noise level");
  bench_cmd->add_option("--eps-list", bench_args.eps_list, "stopping thresholds");
  bench_cmd->add_option("--mu", bench_args.mu, "strong convexity modulus");
  bench_cmd->add_option("--L", bench_args.L, "smoothness constant or 'inf'");
  bench_cmd->add_option("--max-iters", bench_args.max_iters, "iteration cap");
  bench_cmd->add_option("--workers", bench_args.workers, "edge-sweep threads");
  bench_cmd->add_option("--timing", bench_args.timing,
                        "measure|zero (zero writes reproducible timing columns)");
  bench_cmd->add_option("--out", bench_args.out, "output records CSV")->required();

  ReportArgs report_args;
  CLI::App* report_cmd = app.add_subcommand("report", "aggregate bench records");
  report_cmd->add_option("--in", report_args.in, "records CSV")->required();
  report_cmd->add_option("--out", report_args.out, "aggregate CSV")->required();

  FitArgs pipe_fit;
  EvalArgs pipe_eval;
  CLI::App* pipe_cmd =
      app.add_subcommand("pipeline", "fit then eval in one invocation");
  pipe_cmd->add_option("--in", pipe_fit.in, "input CSV")->required();
  pipe_cmd->add_option("--mu", pipe_fit.mu, "strong convexity modulus");
  pipe_cmd->add_option("--L", pipe_fit.L, "smoothness constant or 'inf'");
  pipe_cmd->add_option("--rho", pipe_fit.rho, "penalty (default 1/n)");
  pipe_cmd->add_option("--eps", pipe_fit.eps, "stopping threshold");
  pipe_cmd->add_option("--max-iters", pipe_fit.max_iters, "iteration cap");
  pipe_cmd->add_option("--warm-start", pipe_fit.warm_start, "gp|none");
  pipe_cmd->add_option("--z-update", pipe_fit.z_update, "exact|paper");
  pipe_cmd->add_option("--workers", pipe_fit.workers, "edge-sweep threads");
  pipe_cmd->add_option("--range", pipe_eval.range, "grid bounds a b")->expected(2);
  pipe_cmd->add_option("--ns", pipe_eval.ns, "grid size");
  pipe_cmd->add_option("--true-fn", pipe_eval.true_fn, "x2|none");
  pipe_cmd->add_option("--model-out", pipe_fit.out, "model JSON path")->required();
  pipe_cmd->add_option("--eval-out", pipe_eval.out, "grid CSV path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (synth->parsed()) return run_synth(synth_args);
    if (fit_cmd->parsed()) return run_fit(fit_args).exit_code;
    if (eval_cmd->parsed()) return run_eval(eval_args);
    if (bench_cmd->parsed()) return run_bench(bench_args);
    if (report_cmd->parsed()) return run_report(report_args);
    if (pipe_cmd->parsed()) {
      const FitOutcome fit_outcome = run_fit(pipe_fit);
      pipe_eval.model = pipe_fit.out;
      const int eval_code = run_eval(pipe_eval);
      return fit_outcome.exit_code != kExitOk ? fit_outcome.exit_code : eval_code;
    }
  } catch (const IoFailure& e) {
    std::fprintf(stderr, "I/O error: %s\n", e.what());
    return kExitIo;
  } catch (const OracleNotConvergedError& e) {
    std::fprintf(stderr, "solver error: %s\n", e.what());
    return kExitSolver;
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitValidation;
  } catch (const json::exception& e) {
    std::fprintf(stderr, "I/O error: %s\n", e.what());
    return kExitIo;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitValidation;
  }
  return kExitValidation;
}
