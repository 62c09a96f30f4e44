#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include "hdi/types.hpp"

namespace hdi {

enum class DesignKind { Toeplitz, EquiCorr };
enum class SupportKind { First, RandomFixed };
enum class ErrorKind { Gaussian, ScaledT5 };
enum class FamilyKind { Linear, Logistic };

/// Declarative description of one simulation experiment. The design, the
/// support and the coefficient magnitudes are fixed realizations drawn
/// from the scenario seed; only the noise is redrawn across replications.
struct SimulationScenario {
  std::string name = "scenario";
  int n = 100;
  int p = 500;
  DesignKind design = DesignKind::Toeplitz;
  double rho = -1.0;  // <0 means the per-design default (0.9 / 0.8)
  int s0 = 3;
  SupportKind support = SupportKind::First;
  double coef_upper = 2.0;  // coefficients are U[0, coef_upper]
  ErrorKind error = ErrorKind::Gaussian;
  FamilyKind family = FamilyKind::Linear;
  int reps = 100;
  double alpha = 0.05;
  std::uint64_t seed = 1;

  double design_rho() const {
    if (rho >= 0.0) return rho;
    return design == DesignKind::Toeplitz ? 0.9 : 0.8;
  }
  void validate() const;
};

/// Flat TOML reader for scenario files: `key = value` lines, quoted
/// strings, numbers, comments with '#'. Unknown keys are collected and
/// reported together.
SimulationScenario read_scenario_toml(std::istream& is,
                                      const std::string& source_name);
SimulationScenario read_scenario_toml_file(const std::string& path);

/// The scenario's covariance matrix (Toeplitz rho^|j-k| or equicorrelated).
Matrix scenario_covariance(const SimulationScenario& sc);

}  // namespace hdi
