#include "hdi/nodewise.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "hdi/parallel.hpp"

namespace hdi {

namespace {

void check_lambdas(const Vector& lambdas, Index p) {
  if (lambdas.size() != p) {
    throw InputError("nodewise: need one lambda per column");
  }
  for (Index j = 0; j < p; ++j) {
    if (!(lambdas[j] > 0.0)) {
      throw InputError("nodewise: lambda must be positive (row " +
                       std::to_string(j) + ")");
    }
  }
}

void assemble_row(NodewisePrecision& np, Index j, const Vector& gamma,
                  double tau_sq, double tau_floor) {
  if (!(tau_sq > tau_floor)) {
    throw DegenerateError("nodewise: tau^2 below floor at row " +
                          std::to_string(j) +
                          " (collinear column?)");
  }
  np.tau_sq[j] = tau_sq;
  np.theta.row(j) = -gamma.transpose() / tau_sq;
  np.theta(j, j) = 1.0 / tau_sq;
}

// Certified approximate-inverse bounds, recomputed from the product
// Sigma * theta_row rather than from solver state.
void certify(NodewisePrecision& np, const Matrix& sigma_theta_t) {
  const Index p = np.dim();
  for (Index j = 0; j < p; ++j) {
    double diag_dev = std::abs(sigma_theta_t(j, j) - 1.0);
    double off = 0.0;
    for (Index k = 0; k < p; ++k) {
      if (k != j) off = std::max(off, std::abs(sigma_theta_t(k, j)));
    }
    if (diag_dev > 1e-8 || off > np.kkt_bounds[j] + 1e-8) {
      throw SolverError(
          "nodewise: certification failed at row " + std::to_string(j) +
              " (diag dev " + std::to_string(diag_dev) + ", off " +
              std::to_string(off) + ", bound " +
              std::to_string(np.kkt_bounds[j]) + ")",
          off);
    }
  }
}

}  // namespace

NodewisePrecision nodewise_from_design(const Eigen::Ref<const Matrix>& X,
                                       const Vector& lambdas,
                                       const NodewiseOptions& opts) {
  const Index n = X.rows();
  const Index p = X.cols();
  if (p < 2) throw InputError("nodewise_from_design: need p >= 2");
  require_finite(X, "nodewise_from_design");
  check_lambdas(lambdas, p);

  NodewisePrecision np;
  np.theta.resize(p, p);
  np.tau_sq.resize(p);
  np.tau_tilde_sq.resize(p);
  np.lambdas = lambdas;
  np.design_mode = true;

  parallel_for(p, opts.threads, [&](Index j) {
    Vector gamma = Vector::Zero(p);
    ResidualOracle oracle(X, X.col(j));
    try {
      cd_solve(oracle, lambdas[j], gamma, opts.cd, nullptr, j);
    } catch (const SolverError& e) {
      throw SolverError("nodewise_from_design: row " + std::to_string(j) +
                            ": " + e.what(),
                        e.kkt_gap());
    }
    Vector resid = X.col(j) - X * gamma;
    double tau_tilde = resid.squaredNorm() / static_cast<double>(n);
    double tau = tau_tilde + lambdas[j] * gamma.lpNorm<1>();
    np.tau_tilde_sq[j] = tau_tilde;
    assemble_row(np, j, gamma, tau, opts.tau_floor);
  });
  np.kkt_bounds = lambdas.cwiseQuotient(np.tau_sq);

  if (opts.certify) {
    Matrix M = X * np.theta.transpose();                       // n x p
    Matrix sigma_theta_t = X.transpose() * M / static_cast<double>(n);
    certify(np, sigma_theta_t);
  }
  return np;
}

NodewisePrecision nodewise_from_design(const Eigen::Ref<const Matrix>& X,
                                       double lambda,
                                       const NodewiseOptions& opts) {
  return nodewise_from_design(X, Vector::Constant(X.cols(), lambda), opts);
}

NodewisePrecision nodewise_from_matrix(const Eigen::Ref<const Matrix>& Sigma,
                                       const Vector& lambdas,
                                       const NodewiseOptions& opts) {
  const Index p = Sigma.rows();
  if (Sigma.cols() != p || p < 2) {
    throw InputError("nodewise_from_matrix: need a square input, p >= 2");
  }
  require_finite(Sigma, "nodewise_from_matrix");
  double asym = (Sigma - Sigma.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-10) {
    throw InputError("nodewise_from_matrix: input not symmetric");
  }
  for (Index j = 0; j < p; ++j) {
    if (!(Sigma(j, j) > 0.0)) {
      throw InputError("nodewise_from_matrix: non-positive diagonal at " +
                       std::to_string(j));
    }
  }
  check_lambdas(lambdas, p);

  NodewisePrecision np;
  np.theta.resize(p, p);
  np.tau_sq.resize(p);
  np.tau_tilde_sq.resize(0);  // undefined without a design
  np.lambdas = lambdas;
  np.design_mode = false;

  parallel_for(p, opts.threads, [&](Index j) {
    Vector gamma = Vector::Zero(p);
    CovarianceOracle oracle(Sigma, Sigma.col(j));
    try {
      cd_solve(oracle, lambdas[j], gamma, opts.cd, nullptr, j);
    } catch (const SolverError& e) {
      throw SolverError("nodewise_from_matrix: row " + std::to_string(j) +
                            ": " + e.what(),
                        e.kkt_gap());
    }
    double tau = Sigma(j, j) - Sigma.col(j).dot(gamma);
    assemble_row(np, j, gamma, tau, opts.tau_floor);
  });
  np.kkt_bounds = lambdas.cwiseQuotient(np.tau_sq);

  if (opts.certify) {
    Matrix sigma_theta_t = Sigma * np.theta.transpose();
    certify(np, sigma_theta_t);
  }
  return np;
}

NodewisePrecision nodewise_from_matrix(const Eigen::Ref<const Matrix>& Sigma,
                                       double lambda,
                                       const NodewiseOptions& opts) {
  return nodewise_from_matrix(Sigma, Vector::Constant(Sigma.cols(), lambda),
                              opts);
}

double nodewise_lambda_max(const Eigen::Ref<const Matrix>& X) {
  Matrix gram = X.transpose() * X / static_cast<double>(X.rows());
  double m = 0.0;
  for (Index j = 0; j < gram.cols(); ++j) {
    for (Index k = 0; k < gram.rows(); ++k) {
      if (k != j) m = std::max(m, std::abs(gram(k, j)));
    }
  }
  return m;
}

NodewiseCvResult nodewise_shared_lambda_cv(const Eigen::Ref<const Matrix>& X,
                                           int folds, const Vector& grid,
                                           RngStream rng,
                                           const NodewiseOptions& opts) {
  const Index n = X.rows();
  const Index p = X.cols();
  if (folds < 2) throw ConfigError("nodewise cv: need at least 2 folds");
  if (n < folds) throw ConfigError("nodewise cv: fewer rows than folds");
  for (Index k = 1; k < grid.size(); ++k) {
    if (!(grid[k] < grid[k - 1])) {
      throw ConfigError("nodewise cv: grid must be strictly decreasing");
    }
  }

  RngStream fold_rng = rng.split(0);
  std::vector<int> label(static_cast<size_t>(n));
  {
    std::vector<Index> perm = sample_permutation(fold_rng, n);
    for (Index k = 0; k < n; ++k) {
      label[static_cast<size_t>(perm[static_cast<size_t>(k)])] =
          static_cast<int>(k % folds);
    }
  }

  Vector total = Vector::Zero(grid.size());
  for (int f = 0; f < folds; ++f) {
    std::vector<Index> train, test;
    for (Index i = 0; i < n; ++i) {
      (label[static_cast<size_t>(i)] == f ? test : train).push_back(i);
    }
    Matrix Xtr(static_cast<Index>(train.size()), p);
    Matrix Xte(static_cast<Index>(test.size()), p);
    for (size_t r = 0; r < train.size(); ++r) {
      Xtr.row(static_cast<Index>(r)) = X.row(train[r]);
    }
    for (size_t r = 0; r < test.size(); ++r) {
      Xte.row(static_cast<Index>(r)) = X.row(test[r]);
    }
    Matrix gram = Xtr.transpose() * Xtr / static_cast<double>(Xtr.rows());

    // The grid search only ranks penalties, so it runs at search-grade
    // precision; certificate-grade tolerances apply to the final build.
    CdOptions search_cd;
    search_cd.tol_coef = std::max(opts.cd.tol_coef, 1e-5);
    search_cd.tol_kkt = std::max(opts.cd.tol_kkt, 1e-4);

    // err(j, k): held-out error of nodewise problem j at grid point k.
    Matrix err(p, grid.size());
    parallel_for(p, opts.threads, [&](Index j) {
      Vector gamma = Vector::Zero(p);
      CovarianceOracle oracle(gram, gram.col(j));
      for (Index k = 0; k < grid.size(); ++k) {
        cd_solve(oracle, grid[k], gamma, search_cd, nullptr, j);
        Vector pred = Vector::Zero(Xte.rows());
        for (Index c = 0; c < p; ++c) {
          if (gamma[c] != 0.0) pred += Xte.col(c) * gamma[c];
        }
        err(j, k) = (Xte.col(j) - pred).squaredNorm();
      }
    });
    for (Index j = 0; j < p; ++j) total += err.row(j).transpose();
  }

  Index best = 0;
  for (Index k = 1; k < grid.size(); ++k) {
    if (total[k] < total[best]) best = k;
  }
  NodewiseCvResult out;
  out.lambda = grid[best];
  out.grid = grid;
  out.cv_error = total;
  out.precision = nodewise_from_design(X, out.lambda, opts);
  return out;
}

void save_nodewise_csv(std::ostream& os, const NodewisePrecision& np) {
  const Index p = np.dim();
  os.precision(17);
  os << "p,design_mode\n" << p << "," << (np.design_mode ? 1 : 0) << "\n";
  auto write_vec = [&](const char* name, const Vector& v) {
    os << name;
    for (Index j = 0; j < v.size(); ++j) os << "," << v[j];
    os << "\n";
  };
  write_vec("lambda", np.lambdas);
  write_vec("tau_sq", np.tau_sq);
  write_vec("tau_tilde_sq", np.tau_tilde_sq);
  write_vec("kkt_bound", np.kkt_bounds);
  for (Index j = 0; j < p; ++j) {
    os << "theta";
    for (Index k = 0; k < p; ++k) os << "," << np.theta(j, k);
    os << "\n";
  }
}

NodewisePrecision load_nodewise_csv(std::istream& is) {
  auto next_fields = [&](const std::string& expect_tag) {
    std::string line;
    if (!std::getline(is, line)) {
      throw InputError("nodewise csv: truncated file");
    }
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string tok;
    while (std::getline(ss, tok, ',')) fields.push_back(tok);
    if (!expect_tag.empty() && (fields.empty() || fields[0] != expect_tag)) {
      throw InputError("nodewise csv: expected '" + expect_tag + "' row");
    }
    return fields;
  };
  auto to_vector = [](const std::vector<std::string>& f) {
    Vector v(static_cast<Index>(f.size()) - 1);
    for (size_t i = 1; i < f.size(); ++i) {
      v[static_cast<Index>(i - 1)] = std::stod(f[i]);
    }
    return v;
  };

  next_fields("p");
  auto dims = next_fields("");
  if (dims.size() != 2) throw InputError("nodewise csv: bad header");
  Index p = static_cast<Index>(std::stoll(dims[0]));
  bool design_mode = std::stoi(dims[1]) != 0;

  NodewisePrecision np;
  np.design_mode = design_mode;
  np.lambdas = to_vector(next_fields("lambda"));
  np.tau_sq = to_vector(next_fields("tau_sq"));
  np.tau_tilde_sq = to_vector(next_fields("tau_tilde_sq"));
  np.kkt_bounds = to_vector(next_fields("kkt_bound"));
  if (np.lambdas.size() != p || np.tau_sq.size() != p) {
    throw InputError("nodewise csv: vector length mismatch");
  }
  np.theta.resize(p, p);
  for (Index j = 0; j < p; ++j) {
    auto row = to_vector(next_fields("theta"));
    if (row.size() != p) throw InputError("nodewise csv: bad theta row");
    np.theta.row(j) = row.transpose();
  }
  return np;
}

}  // namespace hdi
