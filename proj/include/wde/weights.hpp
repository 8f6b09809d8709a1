#pragma once

#include <cmath>
#include <cstring>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "wde/error.hpp"
#include "wde/linalg.hpp"
#include "wde/monte_carlo.hpp"

namespace wde {

struct Constant {
  double c = 1.0;
};

/// exp(tᵀx).
struct ExpTilt {
  Vector t;
};

/// One-dimensional factor of a Product weight; an ExpTilt factor has a 1-vector t.
using Factor = std::variant<Constant, ExpTilt>;

/// prod_i factor_i(x_i).
struct Product {
  std::vector<Factor> factors;
};

/// Externally supplied weight. Must be pure and nonnegative.
struct HostRoutine {
  std::function<double(const Vector&)> eval;
  int dim = 0;
};

/// c * exp(tᵀx): the family with closed-form Gaussian integrals.
struct Tilt {
  double c = 1.0;
  Vector t;

  double operator()(const Vector& x) const { return c * std::exp(t.dot(x)); }
};

class WeightFunction {
 public:
  using Variant = std::variant<Constant, ExpTilt, Product, HostRoutine>;

  WeightFunction() : variant_(Constant{1.0}) {}
  WeightFunction(Variant v, double scale = 1.0) : variant_(std::move(v)), scale_(scale) {
    validate();
  }

  static WeightFunction constant(double c) { return WeightFunction(Constant{c}); }
  static WeightFunction exp_tilt(Vector t) { return WeightFunction(ExpTilt{std::move(t)}); }
  static WeightFunction host(std::function<double(const Vector&)> f, int dim) {
    return WeightFunction(HostRoutine{std::move(f), dim});
  }

  const Variant& variant() const { return variant_; }
  double scale() const { return scale_; }

  /// Argument dimension; 0 means any (constants).
  int dim() const {
    return std::visit(
        [](const auto& w) -> int {
          using T = std::decay_t<decltype(w)>;
          if constexpr (std::is_same_v<T, Constant>) return 0;
          if constexpr (std::is_same_v<T, ExpTilt>) return static_cast<int>(w.t.size());
          if constexpr (std::is_same_v<T, Product>) return static_cast<int>(w.factors.size());
          if constexpr (std::is_same_v<T, HostRoutine>) return w.dim;
        },
        variant_);
  }

  bool accepts(int d) const { return dim() == 0 || dim() == d; }

  /// Closed form c * exp(tᵀx) on R^d, if the family has one.
  std::optional<Tilt> tilt(int d) const {
    if (!accepts(d)) throw Error("dimension mismatch");
    if (const auto* c = std::get_if<Constant>(&variant_)) {
      return Tilt{scale_ * c->c, Vector::Zero(d)};
    }
    if (const auto* e = std::get_if<ExpTilt>(&variant_)) return Tilt{scale_, e->t};
    if (const auto* p = std::get_if<Product>(&variant_)) {
      Tilt out{scale_, Vector::Zero(d)};
      for (int i = 0; i < d; ++i) {
        const Factor& f = p->factors[static_cast<std::size_t>(i)];
        if (const auto* fc = std::get_if<Constant>(&f)) {
          out.c *= fc->c;
        } else {
          out.t(i) = std::get<ExpTilt>(f).t(0);
        }
      }
      return out;
    }
    return std::nullopt;
  }

  std::string kind() const {
    static const char* names[] = {"constant", "exp_tilt", "product", "host"};
    return names[variant_.index()];
  }

  double operator()(const Vector& x) const {
    if (!accepts(static_cast<int>(x.size()))) throw Error("dimension mismatch");
    double v = 0.0;
    if (const auto* h = std::get_if<HostRoutine>(&variant_)) {
      v = scale_ * h->eval(x);
      if (v < 0.0) throw Error("weight function must be nonnegative");
    } else {
      v = (*tilt(static_cast<int>(x.size())))(x);
    }
    return v;
  }

  WeightFunction scaled(double c) const {
    if (!(c >= 0.0)) throw Error("weight scale must be nonnegative");
    WeightFunction out = *this;
    out.scale_ *= c;
    return out;
  }

  /// Same values without a closed form, forcing sample-based evaluation downstream.
  WeightFunction opaque(int d) const {
    if (!accepts(d)) throw Error("dimension mismatch");
    if (std::holds_alternative<HostRoutine>(variant_)) return *this;
    WeightFunction inner = *this;
    return host([inner](const Vector& x) { return inner(x); }, d);
  }

 private:
  void validate() const {
    if (!(scale_ >= 0.0) || !std::isfinite(scale_)) throw Error("weight scale must be nonnegative");
    if (const auto* c = std::get_if<Constant>(&variant_)) {
      if (!(c->c >= 0.0) || !std::isfinite(c->c)) {
        throw Error("weight function must be nonnegative");
      }
    } else if (const auto* e = std::get_if<ExpTilt>(&variant_)) {
      if (e->t.size() == 0 || !e->t.allFinite()) throw Error("tilt vector must be finite and nonempty");
    } else if (const auto* p = std::get_if<Product>(&variant_)) {
      if (p->factors.empty()) throw Error("product weight needs at least one factor");
      for (const Factor& f : p->factors) {
        if (const auto* fc = std::get_if<Constant>(&f)) {
          if (!(fc->c >= 0.0) || !std::isfinite(fc->c)) {
            throw Error("weight function must be nonnegative");
          }
        } else if (std::get<ExpTilt>(f).t.size() != 1 || !std::get<ExpTilt>(f).t.allFinite()) {
          throw Error("product factors must be one-dimensional");
        }
      }
    } else if (const auto* h = std::get_if<HostRoutine>(&variant_)) {
      if (!h->eval || h->dim < 1) throw Error("host weight needs a routine and a positive dimension");
    }
  }

  Variant variant_;
  double scale_ = 1.0;
};

inline double eval_wf(const WeightFunction& phi, const Vector& x) { return phi(x); }

/// Derived weight w(v) = E phi(M v + N g) with g ~ N(0, I).
/// Closed form when phi is a tilt; otherwise each evaluation is a seeded sample mean
/// whose seed is derived from the probe point.
class AffineAverage {
 public:
  AffineAverage(WeightFunction base, Matrix in_map, Matrix noise_map, SampleSpec spec = {})
      : base_(std::move(base)), in_(std::move(in_map)), noise_(std::move(noise_map)), spec_(spec) {
    if (noise_.rows() != in_.rows()) throw Error("dimension mismatch");
    if (!base_.accepts(static_cast<int>(in_.rows()))) throw Error("dimension mismatch");
  }

  int dim() const { return static_cast<int>(in_.cols()); }
  const WeightFunction& base() const { return base_; }
  const Matrix& in_map() const { return in_; }
  const Matrix& noise_map() const { return noise_; }
  const SampleSpec& spec() const { return spec_; }
  Method method() const { return tilt() ? Method::ClosedForm : Method::MonteCarlo; }

  std::optional<Tilt> tilt() const {
    auto bt = base_.tilt(static_cast<int>(in_.rows()));
    if (!bt) return std::nullopt;
    const Vector tn = noise_.transpose() * bt->t;
    return Tilt{bt->c * std::exp(0.5 * tn.squaredNorm()), in_.transpose() * bt->t};
  }

  Estimate evaluate(const Vector& v) const {
    if (v.size() != dim()) throw Error("dimension mismatch");
    if (auto t = tilt()) return {(*t)(v), 0.0, 0, 0};
    const std::uint64_t seed =
        derive_seed(spec_.seed, hash_bytes(v.data(), sizeof(double) * static_cast<std::size_t>(v.size())));
    const Matrix g = standard_normals(static_cast<int>(noise_.cols()), spec_.with_seed(seed));
    const Vector centre = in_ * v;
    std::vector<double> values(spec_.n_samples);
    Vector arg(in_.rows());
    for (std::size_t i = 0; i < spec_.n_samples; ++i) {
      arg = centre + noise_ * g.col(static_cast<Eigen::Index>(i));
      values[i] = base_(arg);
      if (!std::isfinite(values[i])) throw Error("integrand not finite at sample " + std::to_string(i));
    }
    return mean_estimate(values, seed);
  }

  double operator()(const Vector& v) const { return evaluate(v).value; }

  /// x -> E w(x + L g'), g' independent of g.
  AffineAverage smoothed(const Matrix& l) const {
    if (l.rows() != dim()) throw Error("dimension mismatch");
    Matrix noise(in_.rows(), noise_.cols() + l.cols());
    noise << in_ * l, noise_;
    return AffineAverage(base_, in_, std::move(noise), spec_);
  }

  AffineAverage scaled(double c) const {
    return AffineAverage(base_.scaled(c), in_, noise_, spec_);
  }

  /// As a plain weight on R^dim: the tilt when closed, else a host routine.
  WeightFunction as_weight() const {
    if (auto t = tilt()) return WeightFunction(ExpTilt{t->t}, t->c);
    AffineAverage self = *this;
    return WeightFunction::host([self](const Vector& v) { return self(v); }, dim());
  }

 private:
  WeightFunction base_;
  Matrix in_;
  Matrix noise_;
  SampleSpec spec_;
};

/// Reduced weight psi(S; x(S)) = E[phi(X) | X(S) = x(S)] under X ~ N(0, C).
struct ReducedWF {
  WeightFunction base;
  PDMatrix model;
  IndexSet subset;
  Method method;
  AffineAverage weight;

  double operator()(const Vector& xs) const { return weight(xs); }
  Estimate evaluate(const Vector& xs) const { return weight.evaluate(xs); }
};

inline ReducedWF reduce_wf(const WeightFunction& phi, const PDMatrix& c, const IndexSet& s,
                           const SampleSpec& spec = {}) {
  const int d = c.dim();
  if (!phi.accepts(d) || s.dim() != d) throw Error("dimension mismatch");
  if (s.empty()) throw Error("empty index set");
  const IndexSet rest = s.complement();
  const Regression r = regression(c.matrix(), s, rest);
  const Matrix sel_s = selector(s);
  const Matrix sel_r = selector(rest);
  Matrix in_map = sel_s + sel_r * r.B;
  Matrix noise = sel_r * psd_factor(r.K);
  AffineAverage w(phi, std::move(in_map), std::move(noise), spec);
  const Method m = w.method();
  return {phi, c, s, m, std::move(w)};
}

struct ThetaWeights {
  AffineAverage theta;       ///< theta(v) = E[phi(v - Y, Y) | X + Y = v]
  AffineAverage theta_star;  ///< theta*(x) = E phi(x, Y)
};

/// Derived weights of a pair weight phi(x, y) on R^d x R^d, X ~ N(0, C1), Y ~ N(0, C2).
inline ThetaWeights theta_wfs(const WeightFunction& phi, const PDMatrix& c1, const Matrix& c2,
                              const SampleSpec& spec = {}) {
  const int d = c1.dim();
  if (c2.rows() != d || c2.cols() != d || !phi.accepts(2 * d)) throw Error("dimension mismatch");
  const PDMatrix sum(c1.matrix() + c2);
  const Matrix gain = sum.solve(c2).transpose();  // C2 (C1 + C2)^{-1}
  const Matrix cond = c2 - gain * c2;
  const Matrix lc = psd_factor(0.5 * (cond + cond.transpose()));
  const Matrix id = Matrix::Identity(d, d);

  Matrix in_t(2 * d, d), noise_t(2 * d, d);
  in_t << id - gain, gain;
  noise_t << -lc, lc;

  Matrix in_s(2 * d, d), noise_s(2 * d, d);
  in_s << id, Matrix::Zero(d, d);
  noise_s << Matrix::Zero(d, d), psd_factor(c2);

  return {AffineAverage(phi, std::move(in_t), std::move(noise_t), spec),
          AffineAverage(phi, std::move(in_s), std::move(noise_s), spec)};
}

struct SuperaddWeights {
  AffineAverage psi;    ///< E[phi(Z_d, X', Y') | Z = z], Z = X + Y
  AffineAverage chi;    ///< E psi(x + Y), Y ~ N(0, B)
  AffineAverage gamma;  ///< E psi(y + X), X ~ N(0, A)
};

/// Weights built from phi(z_d, x', y') on R x R^{d-1} x R^{d-1}, X ~ N(0, A), Y ~ N(0, B);
/// primes denote the leading d-1 coordinates.
inline SuperaddWeights superadd_weights(const WeightFunction& phi, const PDMatrix& a,
                                        const PDMatrix& b, const SampleSpec& spec = {}) {
  const int d = a.dim();
  if (b.dim() != d || !phi.accepts(2 * d - 1)) throw Error("dimension mismatch");
  const PDMatrix sum(a.matrix() + b.matrix());
  const Matrix gain = sum.solve(b.matrix()).transpose();  // B (A + B)^{-1}
  const Matrix cond = b.matrix() - gain * b.matrix();
  const Matrix lc = psd_factor(0.5 * (cond + cond.transpose()));
  const Matrix id = Matrix::Identity(d, d);
  const int q = d - 1;

  Matrix in(2 * d - 1, d), noise(2 * d - 1, d);
  in.setZero();
  noise.setZero();
  in(0, d - 1) = 1.0;
  in.block(1, 0, q, d) = (id - gain).topRows(q);
  in.block(1 + q, 0, q, d) = gain.topRows(q);
  noise.block(1, 0, q, d) = -lc.topRows(q);
  noise.block(1 + q, 0, q, d) = lc.topRows(q);

  AffineAverage psi(phi, std::move(in), std::move(noise), spec);
  AffineAverage chi = psi.smoothed(b.chol());
  AffineAverage gamma = psi.smoothed(a.chol());
  return {std::move(psi), std::move(chi), std::move(gamma)};
}

/// Shift invariance of reduced weights over segments, checked on their closed forms.
inline bool has_toeplitz_property(const WeightFunction& phi, const PDMatrix& c,
                                  double tol = 1e-9) {
  const int d = c.dim();
  if (!phi.tilt(d)) throw Error("Toeplitz property check requires a closed-form weight");
  for (int len = 1; len <= d; ++len) {
    const Tilt ref = *reduce_wf(phi, c, IndexSet::range(d, 0, len)).weight.tilt();
    for (int first = 1; first + len <= d; ++first) {
      const Tilt t = *reduce_wf(phi, c, IndexSet::range(d, first, first + len)).weight.tilt();
      if (std::abs(t.c - ref.c) > tol * std::max(1.0, std::abs(ref.c))) return false;
      if ((t.t - ref.t).cwiseAbs().maxCoeff() > tol * std::max(1.0, ref.t.cwiseAbs().maxCoeff())) {
        return false;
      }
    }
  }
  return true;
}

}  // namespace wde
