#include "hdi/simbench.hpp"

#include <cmath>
#include <limits>
#include <ostream>
#include <string>

#include "hdi/cholesky.hpp"
#include "hdi/csv.hpp"
#include "hdi/parallel.hpp"

namespace hdi {

namespace {

// Substream keys off the scenario root. Noise streams hang off
// kRepBase + rep so replications are independent and order-free.
constexpr std::uint64_t kDesignKey = 1;
constexpr std::uint64_t kSupportKey = 2;
constexpr std::uint64_t kCoefKey = 3;
constexpr std::uint64_t kNodewiseKey = 4;
constexpr std::uint64_t kRepBase = 1000;

double sigmoid(double a) {
  if (a >= 0.0) return 1.0 / (1.0 + std::exp(-a));
  double e = std::exp(a);
  return e / (1.0 + e);
}

struct RepOutcome {
  Vector b_minus_truth_abs;  // |b_j - beta0_j| per coordinate (truth-aware)
  Vector half_widths;
  Vector pvalues;
};

void score_rep(const SimulationScenario& sc, const SimulationInstance& inst,
               const RepOutcome& oc, RepRecord& rec) {
  const Index p = sc.p;
  std::vector<bool> active(static_cast<size_t>(p), false);
  for (Index j : inst.support) active[static_cast<size_t>(j)] = true;

  AdjustedPvalues holm = holm_adjust(oc.pvalues);
  long cov_s0 = 0, cov_s0c = 0;
  double len_s0 = 0.0, len_s0c = 0.0;
  for (Index j = 0; j < p; ++j) {
    bool covered = oc.b_minus_truth_abs[j] <= oc.half_widths[j];
    bool rejected = holm.adjusted[j] <= sc.alpha;
    if (active[static_cast<size_t>(j)]) {
      cov_s0 += covered;
      len_s0 += 2.0 * oc.half_widths[j];
      rec.true_rejections += rejected;
    } else {
      cov_s0c += covered;
      len_s0c += 2.0 * oc.half_widths[j];
      rec.false_rejections += rejected;
    }
  }
  const double s0 = static_cast<double>(inst.support.size());
  const double s0c = static_cast<double>(p) - s0;
  rec.cov_s0 = s0 > 0 ? static_cast<double>(cov_s0) / s0 : 0.0;
  rec.len_s0 = s0 > 0 ? len_s0 / s0 : 0.0;
  rec.cov_s0c = s0c > 0 ? static_cast<double>(cov_s0c) / s0c : 0.0;
  rec.len_s0c = s0c > 0 ? len_s0c / s0c : 0.0;
}

}  // namespace

SimulationInstance generate_instance(const SimulationScenario& sc) {
  sc.validate();
  RngStream root(sc.seed);
  SimulationInstance inst;

  Matrix L = cholesky_lower(scenario_covariance(sc));
  RngStream design_rng = root.split(kDesignKey);
  inst.X.resize(sc.n, sc.p);
  for (int i = 0; i < sc.n; ++i) {
    inst.X.row(i) = sample_gaussian_vector(design_rng, L).transpose();
  }

  if (sc.support == SupportKind::First) {
    for (int j = 0; j < sc.s0; ++j) inst.support.push_back(j);
  } else {
    RngStream support_rng = root.split(kSupportKey);
    inst.support = sample_without_replacement(support_rng, sc.p, sc.s0);
  }

  RngStream coef_rng = root.split(kCoefKey);
  inst.beta0 = Vector::Zero(sc.p);
  for (Index j : inst.support) {
    inst.beta0[j] = sc.coef_upper * coef_rng.next_uniform();
  }
  return inst;
}

Vector draw_errors(const SimulationScenario& sc, int rep) {
  RngStream rng = RngStream(sc.seed)
                      .split(kRepBase + static_cast<std::uint64_t>(rep))
                      .split(0);
  if (sc.error == ErrorKind::Gaussian) {
    return sample_standard_normal(rng, sc.n);
  }
  return sample_scaled_t5(rng, sc.n);
}

Vector draw_logistic_response(const SimulationScenario& sc,
                              const SimulationInstance& inst, int rep) {
  RngStream rng = RngStream(sc.seed)
                      .split(kRepBase + static_cast<std::uint64_t>(rep))
                      .split(0);
  Vector a = inst.X * inst.beta0;
  Vector y(sc.n);
  for (Index i = 0; i < sc.n; ++i) {
    y[i] = rng.next_uniform() < sigmoid(a[i]) ? 1.0 : 0.0;
  }
  return y;
}

MetricsReport aggregate_metrics(const std::vector<RepRecord>& records,
                                int s0) {
  MetricsReport rep;
  rep.reps = static_cast<int>(records.size());
  rep.s0 = s0;
  if (records.empty()) return rep;
  long fwer_count = 0;
  long true_rej = 0;
  for (const RepRecord& r : records) {
    rep.avgcov_s0 += r.cov_s0;
    rep.avglen_s0 += r.len_s0;
    rep.avgcov_s0c += r.cov_s0c;
    rep.avglen_s0c += r.len_s0c;
    fwer_count += (r.false_rejections > 0);
    true_rej += r.true_rejections;
  }
  const double m = static_cast<double>(records.size());
  rep.avgcov_s0 /= m;
  rep.avglen_s0 /= m;
  rep.avgcov_s0c /= m;
  rep.avglen_s0c /= m;
  rep.fwer = static_cast<double>(fwer_count) / m;
  rep.power = s0 > 0 ? static_cast<double>(true_rej) /
                           (m * static_cast<double>(s0))
                     : std::numeric_limits<double>::quiet_NaN();
  if (s0 == 0) {
    rep.avgcov_s0 = std::numeric_limits<double>::quiet_NaN();
    rep.avglen_s0 = std::numeric_limits<double>::quiet_NaN();
  }
  rep.per_rep = records;
  return rep;
}

double delta_diagnostic(const Eigen::Ref<const Matrix>& X,
                        const Eigen::Ref<const Vector>& y,
                        const LassoFit& fit, const NodewisePrecision& theta,
                        const Vector& beta0, const Vector& eps) {
  PivotDecomposition pd = pivot_decomposition(X, y, fit, theta, beta0, eps);
  return pd.Delta.cwiseAbs().maxCoeff();
}

namespace {

std::vector<RepRecord> run_linear(const SimulationScenario& sc,
                                  const SimulationInstance& inst,
                                  const PipelineOptions& opts) {
  RngStream root(sc.seed);

  // Design fixed across reps, so the relaxed inverse is computed once.
  NodewiseOptions nw = opts.nodewise;
  nw.threads = opts.threads;
  Vector grid = lasso_lambda_grid(nodewise_lambda_max(inst.X),
                                  opts.grid_size, opts.grid_ratio);
  NodewiseCvResult nwcv = nodewise_shared_lambda_cv(
      inst.X, opts.cv_folds, grid, root.split(kNodewiseKey), nw);
  const NodewisePrecision& theta = nwcv.precision;

  std::vector<RepRecord> records(static_cast<size_t>(sc.reps));
  parallel_for(sc.reps, opts.threads, [&](Index r) {
    try {
      Vector eps = draw_errors(sc, static_cast<int>(r));
      Vector y = inst.X * inst.beta0 + eps;

      ScaledLassoFit sl = fit_scaled_lasso(
          inst.X, y, opts.scaled_lasso_lambda0, opts.lasso_cd);
      DesparsifiedFit dsp =
          desparsify(inst.X, y, sl.fit, theta, sl.sigma_hat);
      PivotDecomposition pd =
          pivot_decomposition(inst.X, y, sl.fit, theta, inst.beta0, eps);

      RepRecord rec;
      rec.rep = static_cast<int>(r);
      rec.sigma_hat = sl.sigma_hat;
      rec.delta_inf = pd.Delta.cwiseAbs().maxCoeff();
      rec.w_inf = pd.W.cwiseAbs().maxCoeff();

      RepOutcome oc;
      oc.b_minus_truth_abs = (dsp.b - inst.beta0).cwiseAbs();
      oc.half_widths = dsp.ci_half_widths(sc.alpha);
      oc.pvalues = dsp.pvalues;
      score_rep(sc, inst, oc, rec);
      records[static_cast<size_t>(r)] = rec;
    } catch (const Error& e) {
      throw Error("replication " + std::to_string(r) + ": " + e.what());
    }
  });
  return records;
}

std::vector<RepRecord> run_logistic(const SimulationScenario& sc,
                                    const SimulationInstance& inst,
                                    const PipelineOptions& opts) {
  RngStream root(sc.seed);
  GlmOptions glm_opts = opts.glm;
  glm_opts.intercept = false;  // the generating model has none
  LossFamily family = logistic_family();

  NodewiseOptions nw = opts.nodewise;
  nw.threads = opts.threads;

  auto fit_rep = [&](int r, const NodewisePrecision* theta_override,
                     double shared_lambda, int inner_threads,
                     RepRecord& rec) {
    Vector y = draw_logistic_response(sc, inst, r);
    RngStream cv_rng =
        root.split(kRepBase + static_cast<std::uint64_t>(r)).split(1);
    Vector grid =
        lasso_lambda_grid(glm_lambda_max(inst.X, y, family, false),
                          opts.grid_size, opts.grid_ratio);
    GlmCvResult cv = fit_glm_lasso_cv(inst.X, y, family, opts.cv_folds, grid,
                                      cv_rng, glm_opts, inner_threads);

    // Curvature depends on the fitted coefficients, so the relaxed
    // inverse is rebuilt per replication on the weighted design.
    Matrix Xw = glm_weighted_design(inst.X, y, cv.fit, family);
    NodewiseOptions nw_rep = nw;
    nw_rep.threads = inner_threads;
    NodewisePrecision theta =
        theta_override ? *theta_override
                       : nodewise_from_design(Xw, shared_lambda, nw_rep);
    GlmDesparsifiedFit dsp =
        desparsify_glm(inst.X, y, cv.fit, family, theta);

    rec.rep = r;
    rec.sigma_hat = std::numeric_limits<double>::quiet_NaN();
    rec.delta_inf = std::numeric_limits<double>::quiet_NaN();
    rec.w_inf = std::numeric_limits<double>::quiet_NaN();

    RepOutcome oc;
    oc.b_minus_truth_abs = (dsp.b - inst.beta0).cwiseAbs();
    oc.half_widths = dsp.ci_half_widths(sc.alpha);
    oc.pvalues = dsp.pvalues;
    score_rep(sc, inst, oc, rec);
  };

  std::vector<RepRecord> records(static_cast<size_t>(sc.reps));

  // The shared nodewise penalty is cross-validated once, on the first
  // replication's weighted design; later replications rebuild the rows at
  // that penalty on their own weights.
  double shared_lambda;
  {
    Vector y0 = draw_logistic_response(sc, inst, 0);
    RngStream cv_rng = root.split(kRepBase).split(1);
    Vector grid =
        lasso_lambda_grid(glm_lambda_max(inst.X, y0, family, false),
                          opts.grid_size, opts.grid_ratio);
    GlmCvResult cv0 = fit_glm_lasso_cv(inst.X, y0, family, opts.cv_folds,
                                       grid, cv_rng, glm_opts, opts.threads);
    Matrix Xw0 = glm_weighted_design(inst.X, y0, cv0.fit, family);
    Vector ngrid = lasso_lambda_grid(nodewise_lambda_max(Xw0),
                                     opts.grid_size, opts.grid_ratio);
    NodewiseCvResult nwcv = nodewise_shared_lambda_cv(
        Xw0, opts.cv_folds, ngrid, root.split(kNodewiseKey), nw);
    shared_lambda = nwcv.lambda;
    try {
      fit_rep(0, &nwcv.precision, shared_lambda, opts.threads, records[0]);
    } catch (const Error& e) {
      throw Error(std::string("replication 0: ") + e.what());
    }
  }

  if (sc.reps > 1) {
    parallel_for(sc.reps - 1, opts.threads, [&](Index k) {
      int r = static_cast<int>(k) + 1;
      try {
        fit_rep(r, nullptr, shared_lambda, 1, records[static_cast<size_t>(r)]);
      } catch (const Error& e) {
        throw Error("replication " + std::to_string(r) + ": " + e.what());
      }
    });
  }
  return records;
}

}  // namespace

MetricsReport run_scenario(const SimulationScenario& sc,
                           const PipelineOptions& opts) {
  sc.validate();
  SimulationInstance inst = generate_instance(sc);
  std::vector<RepRecord> records = sc.family == FamilyKind::Linear
                                       ? run_linear(sc, inst, opts)
                                       : run_logistic(sc, inst, opts);
  return aggregate_metrics(records, static_cast<int>(inst.support.size()));
}

void write_metrics_csv(std::ostream& os, const SimulationScenario& sc,
                       const MetricsReport& report) {
  os << "name,family,design,n,p,s0,support,coef_upper,reps,alpha,"
        "avgcov_s0,avglen_s0,avgcov_s0c,avglen_s0c,power,fwer\n";
  os << sc.name << ","
     << (sc.family == FamilyKind::Linear ? "linear" : "logistic") << ","
     << (sc.design == DesignKind::Toeplitz ? "toeplitz" : "equicorr") << ","
     << sc.n << "," << sc.p << "," << sc.s0 << ","
     << (sc.support == SupportKind::First ? "first" : "random") << ","
     << format_double(sc.coef_upper) << "," << report.reps << ","
     << format_double(sc.alpha) << "," << format_double(report.avgcov_s0)
     << "," << format_double(report.avglen_s0) << ","
     << format_double(report.avgcov_s0c) << ","
     << format_double(report.avglen_s0c) << ","
     << format_double(report.power) << "," << format_double(report.fwer)
     << "\n";
}

void write_per_rep_csv(std::ostream& os, const MetricsReport& report) {
  os << "rep,sigma_hat,delta_inf,w_inf,cov_s0,len_s0,cov_s0c,len_s0c,"
        "true_rejections,false_rejections\n";
  for (const RepRecord& r : report.per_rep) {
    os << r.rep << "," << format_double(r.sigma_hat) << ","
       << format_double(r.delta_inf) << "," << format_double(r.w_inf) << ","
       << format_double(r.cov_s0) << "," << format_double(r.len_s0) << ","
       << format_double(r.cov_s0c) << "," << format_double(r.len_s0c) << ","
       << r.true_rejections << "," << r.false_rejections << "\n";
  }
}

}  // namespace hdi
