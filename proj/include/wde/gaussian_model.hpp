#pragma once

#include <cmath>
#include <optional>
#include <utility>
#include <vector>

#include "wde/error.hpp"
#include "wde/linalg.hpp"
#include "wde/monte_carlo.hpp"
#include "wde/weights.hpp"

namespace wde {

/// Weighted Gaussian expectations E[phi(P W) (a + w_kᵀ M w_k)] with W ~ N(0, S) on R^m
/// and w_k the leading k <= m coordinates of W.
///
/// Tilted weights are integrated exactly. Otherwise W is drawn once from the SampleSpec and
/// every expectation reuses the same draws, so differences of expectations carry their
/// joint per-sample error.
class MomentSource {
 public:
  MomentSource(Matrix cov, Matrix arg_map, WeightFunction phi, const SampleSpec& spec)
      : cov_(std::move(cov)), arg_(std::move(arg_map)), phi_(std::move(phi)), seed_(spec.seed) {
    if (cov_.rows() != cov_.cols() || arg_.cols() != cov_.rows()) throw Error("dimension mismatch");
    if (!phi_.accepts(static_cast<int>(arg_.rows()))) throw Error("dimension mismatch");
    if (auto t = phi_.tilt(static_cast<int>(arg_.rows()))) {
      const Vector tau = arg_.transpose() * t->t;
      shift_ = cov_ * tau;
      alpha_ = t->c * std::exp(0.5 * tau.dot(shift_));
      closed_ = true;
      return;
    }
    draws_ = psd_factor(cov_) * standard_normals(static_cast<int>(cov_.rows()), spec);
    const Matrix args = arg_ * draws_;
    weights_.resize(spec.n_samples);
    Vector x(args.rows());
    for (std::size_t i = 0; i < spec.n_samples; ++i) {
      x = args.col(static_cast<Eigen::Index>(i));
      weights_[i] = phi_(x);
      if (!std::isfinite(weights_[i])) {
        throw Error("integrand not finite at sample " + std::to_string(i));
      }
    }
  }

  /// phi on R^d under N(0, C).
  static MomentSource plain(const PDMatrix& c, const WeightFunction& phi, const SampleSpec& spec) {
    return MomentSource(c.matrix(), Matrix::Identity(c.dim(), c.dim()), phi, spec);
  }

  /// A derived weight w(x) = E phi(M x + N g) under x ~ N(0, cov): W = (x, g).
  static MomentSource derived(const AffineAverage& w, const Matrix& cov, const SampleSpec& spec) {
    const Eigen::Index k = w.dim(), m = w.noise_map().cols();
    Matrix joint = Matrix::Zero(k + m, k + m);
    joint.topLeftCorner(k, k) = cov;
    joint.bottomRightCorner(m, m).setIdentity();
    Matrix arg(w.in_map().rows(), k + m);
    arg << w.in_map(), w.noise_map();
    return MomentSource(std::move(joint), std::move(arg), w.base(), spec);
  }

  Method method() const { return closed_ ? Method::ClosedForm : Method::MonteCarlo; }
  int dim() const { return static_cast<int>(cov_.rows()); }
  const Matrix& cov() const { return cov_; }

  Quantity expect(double a, const Matrix& m) const {
    const Eigen::Index k = m.rows();
    if (m.cols() != k || k > cov_.rows()) throw Error("dimension mismatch");
    if (closed_) {
      double q = 0.0;
      if (k > 0) {
        const Vector mu = shift_.head(k);
        q = (m * cov_.topLeftCorner(k, k)).trace() + mu.dot(m * mu);
      }
      return Quantity(alpha_ * (a + q));
    }
    const std::size_t n = weights_.size();
    std::vector<double> values(n);
    if (k == 0) {
      for (std::size_t i = 0; i < n; ++i) values[i] = weights_[i] * a;
    } else {
      const auto w = draws_.topRows(k);
      const Eigen::RowVectorXd q = ((m * w).cwiseProduct(w)).colwise().sum();
      for (std::size_t i = 0; i < n; ++i) {
        values[i] = weights_[i] * (a + q(static_cast<Eigen::Index>(i)));
      }
    }
    return Quantity(std::move(values), seed_);
  }

  Quantity alpha() const { return expect(1.0, Matrix()); }

 private:
  Matrix cov_;
  Matrix arg_;
  WeightFunction phi_;
  std::uint64_t seed_ = 0;
  bool closed_ = false;
  double alpha_ = 0.0;
  Vector shift_;
  Matrix draws_;
  std::vector<double> weights_;
};

}  // namespace wde
