#pragma once

#include <iosfwd>
#include <vector>

#include "hdi/glm.hpp"
#include "hdi/inference.hpp"
#include "hdi/lasso.hpp"
#include "hdi/multiplicity.hpp"
#include "hdi/nodewise.hpp"
#include "hdi/rng.hpp"
#include "hdi/scenario.hpp"
#include "hdi/types.hpp"

namespace hdi {

/// Fixed part of a scenario: the design and the true coefficients are one
/// realization per scenario seed; only noise varies across replications.
struct SimulationInstance {
  Matrix X;
  Vector beta0;
  std::vector<Index> support;
};

SimulationInstance generate_instance(const SimulationScenario& sc);

/// Fresh linear-model errors for replication `rep` (deterministic in
/// (scenario seed, rep)).
Vector draw_errors(const SimulationScenario& sc, int rep);

/// Fresh Bernoulli response with success probability logistic(x beta0).
Vector draw_logistic_response(const SimulationScenario& sc,
                              const SimulationInstance& inst, int rep);

struct PipelineOptions {
  int threads = 1;
  int cv_folds = 10;
  int grid_size = 100;
  double grid_ratio = 0.01;
  double scaled_lasso_lambda0 = 0.0;   // <=0: sqrt(2 log p / n)
  CdOptions lasso_cd{};
  NodewiseOptions nodewise{};
  GlmOptions glm{};
};

struct RepRecord {
  int rep = 0;
  double sigma_hat = 0.0;   // scaled-lasso noise scale (linear family)
  double delta_inf = 0.0;   // ||Delta||_inf (linear family)
  double w_inf = 0.0;       // ||W||_inf (linear family)
  double cov_s0 = 0.0;      // fraction of S0 intervals covering beta0_j
  double cov_s0c = 0.0;     // fraction of S0^c intervals covering 0
  double len_s0 = 0.0;      // mean interval length over S0
  double len_s0c = 0.0;
  int true_rejections = 0;  // Holm rejections inside S0
  int false_rejections = 0; // Holm rejections inside S0^c
};

struct MetricsReport {
  double avgcov_s0 = 0.0;
  double avglen_s0 = 0.0;
  double avgcov_s0c = 0.0;
  double avglen_s0c = 0.0;
  double power = 0.0;
  double fwer = 0.0;
  int reps = 0;
  int s0 = 0;
  std::vector<RepRecord> per_rep;
};

/// Empirical means of the per-rep records; run_scenario returns exactly
/// this of its own records, so tables are reproducible from the dump.
MetricsReport aggregate_metrics(const std::vector<RepRecord>& records,
                                int s0);

MetricsReport run_scenario(const SimulationScenario& sc,
                           const PipelineOptions& opts = {});

/// ||Delta||_inf for one replication with known truth.
double delta_diagnostic(const Eigen::Ref<const Matrix>& X,
                        const Eigen::Ref<const Vector>& y,
                        const LassoFit& fit, const NodewisePrecision& theta,
                        const Vector& beta0, const Vector& eps);

void write_metrics_csv(std::ostream& os, const SimulationScenario& sc,
                       const MetricsReport& report);
void write_per_rep_csv(std::ostream& os, const MetricsReport& report);

}  // namespace hdi
