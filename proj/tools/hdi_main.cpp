// Command-line front end: fit/infer on CSV data, run simulation scenarios,
// dump nodewise precision diagnostics.

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "hdi/csv.hpp"
#include "hdi/gaussian.hpp"
#include "hdi/glm.hpp"
#include "hdi/inference.hpp"
#include "hdi/lasso.hpp"
#include "hdi/nodewise.hpp"
#include "hdi/simbench.hpp"

namespace {

using nlohmann::json;

constexpr const char* kVersion = "0.1.0";

struct LambdaPolicy {
  enum class Kind { Cv, Scaled, Universal, Fixed } kind = Kind::Cv;
  double value = 0.0;
};

LambdaPolicy parse_lambda_policy(const std::string& s, bool allow_scaled) {
  LambdaPolicy p;
  if (s == "cv") {
    p.kind = LambdaPolicy::Kind::Cv;
  } else if (s == "scaled" && allow_scaled) {
    p.kind = LambdaPolicy::Kind::Scaled;
  } else if (s == "universal") {
    p.kind = LambdaPolicy::Kind::Universal;
  } else {
    char* end = nullptr;
    double v = std::strtod(s.c_str(), &end);
    if (s.empty() || end != s.c_str() + s.size() || v < 0.0) {
      throw hdi::ConfigError("unrecognized lambda policy '" + s + "'");
    }
    p.kind = LambdaPolicy::Kind::Fixed;
    p.value = v;
  }
  return p;
}

// Scale-aware universal penalties lambda_j = sqrt(2 log p / n) * col scale.
hdi::Vector universal_nodewise_lambdas(const hdi::Matrix& X) {
  const double n = static_cast<double>(X.rows());
  const double p = static_cast<double>(X.cols());
  double base = std::sqrt(2.0 * std::log(p) / n);
  hdi::Vector lam(X.cols());
  for (hdi::Index j = 0; j < X.cols(); ++j) {
    lam[j] = base * std::sqrt(X.col(j).squaredNorm() / n);
  }
  return lam;
}

hdi::NodewisePrecision build_nodewise(const hdi::Matrix& X,
                                      const LambdaPolicy& policy,
                                      std::uint64_t seed, int threads,
                                      double* chosen_lambda) {
  hdi::NodewiseOptions opts;
  opts.threads = threads;
  switch (policy.kind) {
    case LambdaPolicy::Kind::Cv: {
      hdi::Vector grid =
          hdi::lasso_lambda_grid(hdi::nodewise_lambda_max(X), 100, 0.01);
      hdi::NodewiseCvResult cv = hdi::nodewise_shared_lambda_cv(
          X, 10, grid, hdi::RngStream(seed).split(7), opts);
      if (chosen_lambda) *chosen_lambda = cv.lambda;
      return std::move(cv.precision);
    }
    case LambdaPolicy::Kind::Universal: {
      hdi::Vector lam = universal_nodewise_lambdas(X);
      if (chosen_lambda) *chosen_lambda = lam.mean();
      return hdi::nodewise_from_design(X, lam, opts);
    }
    default: {
      if (chosen_lambda) *chosen_lambda = policy.value;
      return hdi::nodewise_from_design(X, policy.value, opts);
    }
  }
}

int cmd_infer(const std::string& input, const std::string& output,
              double alpha, const std::string& family,
              const std::string& lambda_policy,
              const std::string& nodewise_policy, std::uint64_t seed,
              int threads, std::optional<bool> intercept_flag) {
  hdi::RegressionData data = hdi::split_response(hdi::read_csv_file(input));
  const hdi::Index n = data.X.rows();
  const hdi::Index p = data.X.cols();
  if (n < 2) throw hdi::InputError(input + ": need at least two rows");
  hdi::require_finite(data.X, "predictors");
  hdi::require_finite(data.y, "response");

  std::ofstream os(output);
  if (!os) throw hdi::ConfigError("cannot open output file: " + output);

  if (family == "linear") {
    LambdaPolicy lp = parse_lambda_policy(lambda_policy, true);
    LambdaPolicy np = parse_lambda_policy(nodewise_policy, false);

    hdi::ScaledLassoFit scaled = hdi::fit_scaled_lasso(data.X, data.y);
    hdi::LassoFit fit;
    switch (lp.kind) {
      case LambdaPolicy::Kind::Scaled:
        fit = scaled.fit;
        break;
      case LambdaPolicy::Kind::Cv: {
        hdi::Vector grid = hdi::lasso_lambda_grid(
            hdi::lasso_lambda_max(data.X, data.y), 100, 0.01);
        fit = hdi::fit_lasso_cv(data.X, data.y, 10, grid,
                                hdi::RngStream(seed).split(3), {}, threads)
                  .fit;
        break;
      }
      case LambdaPolicy::Kind::Universal:
        throw hdi::ConfigError(
            "lambda policy 'universal' applies to the nodewise step; use "
            "cv, scaled or a number here");
      case LambdaPolicy::Kind::Fixed:
        fit = hdi::fit_lasso(data.X, data.y, lp.value);
        break;
    }

    hdi::NodewisePrecision theta =
        build_nodewise(data.X, np, seed, threads, nullptr);
    hdi::DesparsifiedFit dsp =
        hdi::desparsify(data.X, data.y, fit, theta, scaled.sigma_hat);
    hdi::write_inference_csv(os, dsp, alpha);
    return 0;
  }

  if (family != "logistic") {
    throw hdi::ConfigError("family must be 'linear' or 'logistic'");
  }

  LambdaPolicy lp = parse_lambda_policy(lambda_policy, false);
  LambdaPolicy np = parse_lambda_policy(nodewise_policy, false);
  hdi::GlmOptions glm_opts;
  glm_opts.intercept = intercept_flag.value_or(true);
  hdi::LossFamily fam = hdi::logistic_family();

  hdi::GlmFit fit;
  switch (lp.kind) {
    case LambdaPolicy::Kind::Cv: {
      hdi::Vector grid = hdi::lasso_lambda_grid(
          hdi::glm_lambda_max(data.X, data.y, fam, glm_opts.intercept), 100,
          0.01);
      fit = hdi::fit_glm_lasso_cv(data.X, data.y, fam, 10, grid,
                                  hdi::RngStream(seed).split(3), glm_opts,
                                  threads)
                .fit;
      break;
    }
    case LambdaPolicy::Kind::Fixed:
      fit = hdi::fit_glm_lasso(data.X, data.y, fam, lp.value, glm_opts);
      break;
    default:
      throw hdi::ConfigError(
          "logistic lambda policy must be 'cv' or a number");
  }

  hdi::Matrix Xw = hdi::glm_weighted_design(data.X, data.y, fit, fam);
  hdi::NodewisePrecision theta =
      build_nodewise(Xw, np, seed, threads, nullptr);
  hdi::GlmDesparsifiedFit dsp =
      hdi::desparsify_glm(data.X, data.y, fit, fam, theta);

  // Same row layout as the linear report plus the family column.
  os.precision(17);
  os << "index,b,se,z,p,ci_low,ci_high,family\n";
  hdi::Vector half = dsp.ci_half_widths(alpha);
  const double sqrt_n = std::sqrt(static_cast<double>(dsp.n));
  for (hdi::Index j = 0; j < dsp.b.size(); ++j) {
    os << (j + 1) << "," << hdi::format_double(dsp.b[j]) << ","
       << hdi::format_double(dsp.sigma_hat[j] / sqrt_n) << ","
       << hdi::format_double(dsp.zscores[j]) << ","
       << hdi::format_double(dsp.pvalues[j]) << ","
       << hdi::format_double(dsp.b[j] - half[j]) << ","
       << hdi::format_double(dsp.b[j] + half[j]) << ",logistic\n";
  }
  return 0;
}

int cmd_simulate(const std::string& scenario_path, const std::string& output,
                 std::optional<std::uint64_t> seed_override, int threads,
                 bool small_profile) {
  hdi::SimulationScenario sc =
      hdi::read_scenario_toml_file(scenario_path);
  if (seed_override) sc.seed = *seed_override;
  if (small_profile) {
    sc.n = 100;
    sc.p = 120;
    sc.reps = 100;
    sc.validate();
  }

  hdi::PipelineOptions opts;
  opts.threads = threads;

  auto t0 = std::chrono::steady_clock::now();
  hdi::MetricsReport report = hdi::run_scenario(sc, opts);
  double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();

  std::string stem = output;
  if (stem.size() > 4 && stem.substr(stem.size() - 4) == ".csv") {
    stem = stem.substr(0, stem.size() - 4);
  }
  {
    std::ofstream os(output);
    if (!os) throw hdi::ConfigError("cannot open output file: " + output);
    hdi::write_metrics_csv(os, sc, report);
  }
  {
    std::ofstream os(stem + "_reps.csv");
    hdi::write_per_rep_csv(os, report);
  }
  {
    json manifest;
    manifest["tool"] = "hdi";
    manifest["version"] = kVersion;
    manifest["scenario_file"] = scenario_path;
    manifest["name"] = sc.name;
    manifest["seed"] = sc.seed;
    manifest["threads"] = threads;
    manifest["small_profile"] = small_profile;
    manifest["n"] = sc.n;
    manifest["p"] = sc.p;
    manifest["s0"] = sc.s0;
    manifest["reps"] = report.reps;
    manifest["alpha"] = sc.alpha;
    manifest["elapsed_seconds"] = elapsed;
    manifest["outputs"] = {output, stem + "_reps.csv"};
    std::ofstream os(stem + "_manifest.json");
    os << manifest.dump(2) << "\n";
  }
  return 0;
}

int cmd_nodewise(const std::string& input, const std::string& output,
                 const std::string& lambda_policy, std::uint64_t seed,
                 int threads, const std::string& dump_path) {
  hdi::CsvTable table = hdi::read_csv_file(input);
  hdi::Matrix X;
  if (table.col("y") >= 0) {
    X = hdi::split_response(table).X;  // design-only view of a fit table
  } else {
    X = table.values;
  }
  hdi::require_finite(X, "design");

  LambdaPolicy np = parse_lambda_policy(lambda_policy, false);
  double chosen = 0.0;
  hdi::NodewisePrecision theta =
      build_nodewise(X, np, seed, threads, &chosen);

  std::ofstream os(output);
  if (!os) throw hdi::ConfigError("cannot open output file: " + output);
  os << "index,lambda,tau_sq,tau_tilde_sq,kkt_bound,theta_jj\n";
  for (hdi::Index j = 0; j < theta.dim(); ++j) {
    double tts = theta.tau_tilde_sq.size() > 0 ? theta.tau_tilde_sq[j]
                                               : std::nan("");
    os << (j + 1) << "," << hdi::format_double(theta.lambdas[j]) << ","
       << hdi::format_double(theta.tau_sq[j]) << ","
       << hdi::format_double(tts) << ","
       << hdi::format_double(theta.kkt_bounds[j]) << ","
       << hdi::format_double(theta.theta(j, j)) << "\n";
  }
  if (!dump_path.empty()) {
    std::ofstream dump(dump_path);
    if (!dump) throw hdi::ConfigError("cannot open dump file: " + dump_path);
    hdi::save_nodewise_csv(dump, theta);
  }
  (void)chosen;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"De-sparsified lasso inference for high-dimensional models"};
  app.require_subcommand(1);

  std::string input, output, scenario;
  std::string family = "linear";
  std::string lambda_policy;  // per-family default resolved below
  std::string nodewise_policy = "cv";
  std::string dump_path;
  double alpha = 0.05;
  std::uint64_t seed = 1;
  int threads = 1;
  bool small_profile = false;
  bool intercept = false, no_intercept = false;

  CLI::App* infer = app.add_subcommand(
      "infer", "Point estimates, intervals and p-values from a CSV table");
  infer->add_option("--input", input, "CSV with response column 'y'")
      ->required();
  infer->add_option("--output", output, "destination CSV")->required();
  infer->add_option("--alpha", alpha, "two-sided level (default 0.05)");
  infer->add_option("--family", family, "linear | logistic");
  infer->add_option("--lambda", lambda_policy,
                    "cv | scaled (linear only) | <float>");
  infer->add_option("--nodewise-lambda", nodewise_policy,
                    "cv | universal | <float>");
  infer->add_option("--seed", seed, "seed for fold assignment");
  infer->add_option("--threads", threads, "worker threads (0 = hardware)");
  infer->add_flag("--intercept", intercept,
                  "force an unpenalized intercept (logistic default: on)");
  infer->add_flag("--no-intercept", no_intercept, "disable the intercept");

  CLI::App* simulate = app.add_subcommand(
      "simulate", "Run a scenario file and write metric/per-rep tables");
  simulate->add_option("--scenario", scenario, "TOML scenario file")
      ->required();
  simulate->add_option("--output", output, "metrics CSV path")->required();
  simulate->add_option("--seed", seed, "override the scenario seed");
  simulate->add_option("--threads", threads, "worker threads (0 = hardware)");
  simulate->add_flag("--small", small_profile,
                     "shrink to n=100, p=120, reps=100");

  CLI::App* nodewise = app.add_subcommand(
      "nodewise", "Relaxed-inverse diagnostics for a design CSV");
  nodewise->add_option("--input", input, "CSV of predictors ('y' ignored)")
      ->required();
  nodewise->add_option("--output", output, "diagnostics CSV")->required();
  nodewise->add_option("--lambda", lambda_policy,
                       "cv | universal | <float> (default cv)");
  nodewise->add_option("--seed", seed, "seed for fold assignment");
  nodewise->add_option("--threads", threads, "worker threads");
  nodewise->add_option("--dump", dump_path,
                       "also write the full precision object (CSV)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (infer->parsed()) {
      std::optional<bool> icpt;
      if (intercept) icpt = true;
      if (no_intercept) icpt = false;
      if (!(alpha > 0.0 && alpha < 1.0)) {
        throw hdi::ConfigError("alpha must lie in (0,1)");
      }
      if (lambda_policy.empty()) {
        lambda_policy = family == "logistic" ? "cv" : "scaled";
      }
      return cmd_infer(input, output, alpha, family, lambda_policy,
                       nodewise_policy, seed, threads, icpt);
    }
    if (simulate->parsed()) {
      std::optional<std::uint64_t> seed_override;
      if (simulate->count("--seed") > 0) seed_override = seed;
      return cmd_simulate(scenario, output, seed_override, threads,
                          small_profile);
    }
    if (nodewise->parsed()) {
      if (lambda_policy.empty()) lambda_policy = "cv";
      return cmd_nodewise(input, output, lambda_policy, seed, threads,
                          dump_path);
    }
  } catch (const hdi::SolverError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const hdi::DegenerateError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const hdi::FactorizationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const hdi::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
