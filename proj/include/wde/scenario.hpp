#pragma once

#include <map>
#include <optional>
#include <string>

#include "wde/error.hpp"
#include "wde/linalg.hpp"
#include "wde/monte_carlo.hpp"
#include "wde/weights.hpp"

namespace wde {

/// Named inputs for conditions and inequalities.
struct Scenario {
  std::map<std::string, Matrix> matrices;  ///< C, C1, C2, A, B, E as needed
  WeightFunction wf;                       ///< defaults to the constant 1
  std::optional<double> lambda;
  std::optional<int> p;  ///< block split: leading p coordinates
  std::optional<double> r;

  bool has(const std::string& name) const { return matrices.count(name) > 0; }

  const Matrix& matrix(const std::string& name) const {
    auto it = matrices.find(name);
    if (it == matrices.end()) throw ConfigError("scenario is missing field '" + name + "'");
    return it->second;
  }

  PDMatrix pd(const std::string& name) const {
    try {
      return PDMatrix(matrix(name));
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& e) {
      throw Error("matrix '" + name + "': " + e.what());
    }
  }

  double require_lambda() const {
    if (!lambda) throw ConfigError("scenario is missing field 'lambda'");
    if (!(*lambda >= 0.0 && *lambda <= 1.0)) throw ConfigError("lambda must lie in [0, 1]");
    return *lambda;
  }

  int require_p(int d, bool allow_d = false) const {
    if (!p) throw ConfigError("scenario is missing field 'p'");
    if (*p < 1 || *p > (allow_d ? d : d - 1)) {
      throw ConfigError(allow_d ? "p must satisfy 1 <= p <= d" : "p must satisfy 1 <= p < d");
    }
    return *p;
  }

  double require_r() const {
    if (!r) throw ConfigError("scenario is missing field 'r'");
    if (!(*r > 0.0)) throw ConfigError("r must be positive");
    return *r;
  }
};

struct EvalOptions {
  SampleSpec sampling;
  double zcrit = 4.0;
  double tolerance = 1e-9;
  bool force_monte_carlo = false;  ///< integrate tilted weights by sampling too

  /// The weight as it should be integrated on R^d under these options.
  WeightFunction prepare(const WeightFunction& phi, int d) const {
    if (!phi.accepts(d)) throw Error("dimension mismatch: weight has dimension " +
                                     std::to_string(phi.dim()) + ", expected " + std::to_string(d));
    return force_monte_carlo ? phi.opaque(d) : phi;
  }

  Verdict verdict(const Estimate& e, Direction dir) const {
    return signed_verdict(e, dir, zcrit, tolerance);
  }
};

}  // namespace wde
