#include "hdi/scenario.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace hdi {

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t");
  return s.substr(a, b - a + 1);
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return s;
}

double to_number(const std::string& v, const std::string& key) {
  char* end = nullptr;
  double x = std::strtod(v.c_str(), &end);
  if (v.empty() || end != v.c_str() + v.size()) {
    throw ConfigError("scenario: key '" + key + "' needs a number, got '" +
                      v + "'");
  }
  return x;
}

std::string to_string_value(const std::string& v, const std::string& key) {
  if (v.size() >= 2 && v.front() == '"' && v.back() == '"') {
    return v.substr(1, v.size() - 2);
  }
  if (v.size() >= 2 && v.front() == '\'' && v.back() == '\'') {
    return v.substr(1, v.size() - 2);
  }
  throw ConfigError("scenario: key '" + key + "' needs a quoted string");
}

}  // namespace

void SimulationScenario::validate() const {
  if (n < 2 || p < 2) throw ConfigError("scenario: need n >= 2 and p >= 2");
  if (s0 < 0 || s0 > p) throw ConfigError("scenario: need 0 <= s0 <= p");
  double r = design_rho();
  if (!(r >= 0.0 && r < 1.0)) throw ConfigError("scenario: rho must be in [0,1)");
  if (coef_upper < 0.0) throw ConfigError("scenario: coef_upper < 0");
  if (reps < 1) throw ConfigError("scenario: reps < 1");
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw ConfigError("scenario: alpha must lie in (0,1)");
  }
  if (family == FamilyKind::Logistic && error == ErrorKind::ScaledT5) {
    throw ConfigError("scenario: t5 errors apply to the linear family only");
  }
}

SimulationScenario read_scenario_toml(std::istream& is,
                                      const std::string& source_name) {
  SimulationScenario sc;
  std::map<std::string, std::string> kv;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    size_t hash = std::string::npos;
    bool in_quote = false;
    for (size_t i = 0; i < line.size(); ++i) {
      if (line[i] == '"') in_quote = !in_quote;
      if (line[i] == '#' && !in_quote) {
        hash = i;
        break;
      }
    }
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(source_name + ":" + std::to_string(lineno) +
                        ": expected 'key = value'");
    }
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) {
      throw ConfigError(source_name + ":" + std::to_string(lineno) +
                        ": expected 'key = value'");
    }
    kv[key] = value;
  }

  std::string unknown;
  for (const auto& [key, value] : kv) {
    if (key == "name") {
      sc.name = to_string_value(value, key);
    } else if (key == "n") {
      sc.n = static_cast<int>(to_number(value, key));
    } else if (key == "p") {
      sc.p = static_cast<int>(to_number(value, key));
    } else if (key == "design") {
      std::string v = lower(to_string_value(value, key));
      if (v == "toeplitz") {
        sc.design = DesignKind::Toeplitz;
      } else if (v == "equicorr" || v == "equi_corr" || v == "equi.corr") {
        sc.design = DesignKind::EquiCorr;
      } else {
        throw ConfigError("scenario: design must be 'toeplitz' or 'equicorr'");
      }
    } else if (key == "rho") {
      sc.rho = to_number(value, key);
    } else if (key == "s0") {
      sc.s0 = static_cast<int>(to_number(value, key));
    } else if (key == "support") {
      std::string v = lower(to_string_value(value, key));
      if (v == "first") {
        sc.support = SupportKind::First;
      } else if (v == "random") {
        sc.support = SupportKind::RandomFixed;
      } else {
        throw ConfigError("scenario: support must be 'first' or 'random'");
      }
    } else if (key == "coef_upper") {
      sc.coef_upper = to_number(value, key);
    } else if (key == "error") {
      std::string v = lower(to_string_value(value, key));
      if (v == "gaussian") {
        sc.error = ErrorKind::Gaussian;
      } else if (v == "t5") {
        sc.error = ErrorKind::ScaledT5;
      } else {
        throw ConfigError("scenario: error must be 'gaussian' or 't5'");
      }
    } else if (key == "family") {
      std::string v = lower(to_string_value(value, key));
      if (v == "linear") {
        sc.family = FamilyKind::Linear;
      } else if (v == "logistic") {
        sc.family = FamilyKind::Logistic;
      } else {
        throw ConfigError("scenario: family must be 'linear' or 'logistic'");
      }
    } else if (key == "reps") {
      sc.reps = static_cast<int>(to_number(value, key));
    } else if (key == "alpha") {
      sc.alpha = to_number(value, key);
    } else if (key == "seed") {
      sc.seed = static_cast<std::uint64_t>(to_number(value, key));
    } else {
      unknown += unknown.empty() ? key : (", " + key);
    }
  }
  if (!unknown.empty()) {
    throw ConfigError(source_name + ": unknown scenario keys: " + unknown);
  }
  sc.validate();
  return sc;
}

SimulationScenario read_scenario_toml_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open scenario file: " + path);
  return read_scenario_toml(is, path);
}

Matrix scenario_covariance(const SimulationScenario& sc) {
  const Index p = sc.p;
  const double rho = sc.design_rho();
  Matrix sigma(p, p);
  if (sc.design == DesignKind::Toeplitz) {
    for (Index j = 0; j < p; ++j) {
      for (Index k = 0; k < p; ++k) {
        sigma(j, k) = std::pow(rho, std::abs(static_cast<double>(j - k)));
      }
    }
  } else {
    sigma.setConstant(rho);
    sigma.diagonal().setOnes();
  }
  return sigma;
}

}  // namespace hdi
