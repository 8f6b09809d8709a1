#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "wde/error.hpp"
#include "wde/random.hpp"

namespace wde {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

inline double max_abs(const Matrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

/// Symmetric positive-definite matrix with its lower Cholesky factor.
class PDMatrix {
 public:
  PDMatrix() = default;

  explicit PDMatrix(const Matrix& entries) {
    if (entries.rows() != entries.cols() || entries.rows() == 0) {
      throw Error("matrix must be square and nonempty");
    }
    const double scale = max_abs(entries);
    if (!entries.allFinite()) throw Error("matrix has non-finite entries");
    if (max_abs(entries - entries.transpose()) > 1e-12 * scale) {
      throw Error("matrix is not symmetric");
    }
    entries_ = 0.5 * (entries + entries.transpose());
    Eigen::LLT<Matrix> llt(entries_);
    if (llt.info() != Eigen::Success) throw Error("not positive definite");
    chol_ = llt.matrixL();
    for (Eigen::Index i = 0; i < chol_.rows(); ++i) {
      if (!(chol_(i, i) > 0.0)) throw Error("not positive definite");
    }
    if (max_abs(chol_ * chol_.transpose() - entries_) > 1e-10 * scale) {
      throw Error("not positive definite: factorization does not reconstruct the matrix");
    }
  }

  int dim() const { return static_cast<int>(entries_.rows()); }
  const Matrix& matrix() const { return entries_; }
  /// Lower-triangular L with C = L Lᵀ.
  const Matrix& chol() const { return chol_; }
  double operator()(int i, int j) const { return entries_(i, j); }

  Matrix solve(const Matrix& rhs) const {
    Matrix y = chol_.triangularView<Eigen::Lower>().solve(rhs);
    return chol_.transpose().triangularView<Eigen::Upper>().solve(y);
  }
  Matrix inverse() const {
    Matrix inv = solve(Matrix::Identity(dim(), dim()));
    return 0.5 * (inv + inv.transpose());
  }

 private:
  Matrix entries_;
  Matrix chol_;
};

/// Strictly increasing subset of {0, ..., dim-1}. Printed 1-based.
class IndexSet {
 public:
  IndexSet() = default;
  IndexSet(int dim, std::vector<int> members) : dim_(dim), members_(std::move(members)) {
    if (dim < 0) throw Error("index set dimension must be nonnegative");
    for (std::size_t k = 0; k < members_.size(); ++k) {
      if (members_[k] < 0 || members_[k] >= dim) throw Error("index out of range");
      if (k > 0 && members_[k] <= members_[k - 1]) {
        throw Error("index set members must be strictly increasing");
      }
    }
  }

  static IndexSet from_mask(int dim, std::uint64_t mask) {
    std::vector<int> m;
    for (int i = 0; i < dim; ++i) {
      if (mask & (std::uint64_t{1} << i)) m.push_back(i);
    }
    return IndexSet(dim, std::move(m));
  }
  /// Half-open range [first, last).
  static IndexSet range(int dim, int first, int last) {
    std::vector<int> m;
    for (int i = first; i < last; ++i) m.push_back(i);
    return IndexSet(dim, std::move(m));
  }
  static IndexSet full(int dim) { return range(dim, 0, dim); }

  int dim() const { return dim_; }
  int size() const { return static_cast<int>(members_.size()); }
  bool empty() const { return members_.empty(); }
  const std::vector<int>& members() const { return members_; }
  int operator[](int k) const { return members_[static_cast<std::size_t>(k)]; }

  std::uint64_t mask() const {
    std::uint64_t m = 0;
    for (int i : members_) m |= std::uint64_t{1} << i;
    return m;
  }
  bool contains(int i) const { return std::binary_search(members_.begin(), members_.end(), i); }
  IndexSet complement() const {
    std::vector<int> m;
    for (int i = 0; i < dim_; ++i) {
      if (!contains(i)) m.push_back(i);
    }
    return IndexSet(dim_, std::move(m));
  }

  std::string to_string() const {
    std::string s = "{";
    for (std::size_t k = 0; k < members_.size(); ++k) {
      if (k) s += ",";
      s += std::to_string(members_[k] + 1);
    }
    return s + "}";
  }

  friend bool operator==(const IndexSet&, const IndexSet&) = default;

 private:
  int dim_ = 0;
  std::vector<int> members_;
};

inline Matrix block(const Matrix& m, const IndexSet& rows, const IndexSet& cols) {
  Matrix out(rows.size(), cols.size());
  for (int a = 0; a < rows.size(); ++a) {
    for (int b = 0; b < cols.size(); ++b) out(a, b) = m(rows[a], cols[b]);
  }
  return out;
}

inline Matrix principal(const Matrix& m, const IndexSet& s) { return block(m, s, s); }

inline Vector restrict(const Vector& v, const IndexSet& s) {
  Vector out(s.size());
  for (int a = 0; a < s.size(); ++a) out(a) = v(s[a]);
  return out;
}

/// Places a |S|x|S| matrix at rows/cols S of a dim x dim zero matrix.
inline Matrix embed(const Matrix& sub, const IndexSet& s) {
  Matrix out = Matrix::Zero(s.dim(), s.dim());
  for (int a = 0; a < s.size(); ++a) {
    for (int b = 0; b < s.size(); ++b) out(s[a], s[b]) = sub(a, b);
  }
  return out;
}

/// d x |S| selection matrix E with x = E x(S) on the S coordinates.
inline Matrix selector(const IndexSet& s) {
  Matrix e = Matrix::Zero(s.dim(), s.size());
  for (int a = 0; a < s.size(); ++a) e(s[a], a) = 1.0;
  return e;
}

inline double log_det(const PDMatrix& c) {
  return 2.0 * c.chol().diagonal().array().log().sum();
}

inline PDMatrix submatrix(const PDMatrix& c, const IndexSet& s) {
  if (s.empty()) throw Error("empty index set");
  if (s.dim() != c.dim()) throw Error("index set dimension does not match matrix");
  return PDMatrix(principal(c.matrix(), s));
}

/// log det C(S), with the empty set contributing 0.
inline double log_det(const PDMatrix& c, const IndexSet& s) {
  return s.empty() ? 0.0 : log_det(submatrix(c, s));
}

struct ConditionalParams {
  Matrix D;     ///< p x (d-p) regression of the leading block on the trailing block
  PDMatrix K;   ///< Schur complement of the trailing block
};

/// Leading block x(1..p) given trailing block: mean D x(p+1..d), covariance K.
inline ConditionalParams conditional_params(const PDMatrix& c, int p) {
  const int d = c.dim();
  if (p < 1 || p >= d) throw Error("block split p must satisfy 1 <= p < d");
  const Matrix& m = c.matrix();
  const Matrix cross = m.topRightCorner(p, d - p);
  const PDMatrix tail(m.bottomRightCorner(d - p, d - p));
  Matrix d_mat = tail.solve(cross.transpose()).transpose();
  Matrix k = m.topLeftCorner(p, p) - d_mat * cross.transpose();
  return {std::move(d_mat), PDMatrix(0.5 * (k + k.transpose()))};
}

/// Regression of x(rest) on x(S) under N(0, C): B = C(rest, S) C(S)^{-1}, Schur K.
struct Regression {
  Matrix B;
  Matrix K;  ///< positive semidefinite; empty when rest is empty
};

inline Regression regression(const Matrix& c, const IndexSet& s, const IndexSet& rest) {
  if (s.empty()) return {Matrix::Zero(rest.size(), 0), principal(c, rest)};
  const PDMatrix cs(principal(c, s));
  const Matrix cross = block(c, rest, s);
  Matrix b = cs.solve(cross.transpose()).transpose();
  Matrix k = principal(c, rest) - b * cross.transpose();
  return {std::move(b), 0.5 * (k + k.transpose())};
}

struct RankOne {
  Vector v;
  double sign;  ///< E = sign * v vᵀ
};

inline RankOne rank_one_factor(const Matrix& e) {
  if (e.rows() != e.cols() || e.rows() == 0) throw Error("update must be square");
  const double scale = max_abs(e);
  if (scale == 0.0) throw Error("update is not rank one");
  if (max_abs(e - e.transpose()) > 1e-12 * scale) throw Error("update is not symmetric");
  Eigen::Index k = 0;
  e.diagonal().cwiseAbs().maxCoeff(&k);
  const double pivot = e(k, k);
  if (std::abs(pivot) <= 1e-14 * scale) throw Error("update is not rank one");
  Vector v = e.col(k) / std::sqrt(std::abs(pivot));
  const double sign = pivot > 0 ? 1.0 : -1.0;
  if (max_abs(sign * v * v.transpose() - e) > 1e-10 * scale) throw Error("update is not rank one");
  return {std::move(v), sign};
}

/// (G + E)^{-1} for a rank-one symmetric E.
inline Matrix sherman_morrison_inverse(const PDMatrix& g, const Matrix& e) {
  if (e.rows() != g.dim()) throw Error("dimension mismatch");
  rank_one_factor(e);
  const Matrix g_inv = g.inverse();
  const double gval = (e * g_inv).trace();
  if (std::abs(1.0 + gval) < 1e-12) throw Error("singular update (g = -1)");
  Matrix out = g_inv - g_inv * e * g_inv / (1.0 + gval);
  return 0.5 * (out + out.transpose());
}

inline int cyclic_distance(int i, int j, int d) {
  const int a = std::abs(j - i);
  return std::min(a, d - a);
}

/// Toeplitz matrix with entries first_row[distance]; missing distances are 0.
inline PDMatrix toeplitz(std::span<const double> first_row, bool cyclic,
                         std::optional<int> dim = std::nullopt) {
  const int d = dim.value_or(static_cast<int>(first_row.size()));
  if (d < 1) throw Error("toeplitz dimension must be positive");
  Matrix m(d, d);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      const int k = cyclic ? cyclic_distance(i, j, d) : std::abs(i - j);
      m(i, j) = k < static_cast<int>(first_row.size()) ? first_row[static_cast<std::size_t>(k)] : 0.0;
    }
  }
  try {
    return PDMatrix(m);
  } catch (const Error&) {
    throw Error("not positive definite");
  }
}

inline bool is_toeplitz(const Matrix& m, bool cyclic, double rel_tol = 1e-12) {
  const int d = static_cast<int>(m.rows());
  const double tol = rel_tol * std::max(1.0, max_abs(m));
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      const int k = cyclic ? cyclic_distance(i, j, d) : std::abs(i - j);
      if (std::abs(m(i, j) - m(0, k)) > tol) return false;
    }
  }
  return true;
}

/// (1/d) M Mᵀ + 1e-3 I with M seeded standard normals.
inline PDMatrix random_pd(int d, std::uint64_t seed) {
  if (d < 1) throw Error("dimension must be positive");
  Matrix m(d, d);
  fill_standard_normal(std::span<double>(m.data(), static_cast<std::size_t>(m.size())),
                       derive_seed(seed, 0));
  Matrix c = m * m.transpose() / static_cast<double>(d);
  c.diagonal().array() += 1e-3;
  return PDMatrix(0.5 * (c + c.transpose()));
}

/// Any L with L Lᵀ = S for a positive semidefinite S.
inline Matrix psd_factor(const Matrix& s) {
  if (s.size() == 0) return Matrix(s.rows(), s.cols());
  Eigen::LLT<Matrix> llt(s);
  if (llt.info() == Eigen::Success) {
    Matrix l = llt.matrixL();
    if (max_abs(l * l.transpose() - s) <= 1e-10 * std::max(1.0, max_abs(s))) return l;
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (s + s.transpose()));
  Vector w = eig.eigenvalues();
  const double tol = 1e-10 * std::max(1.0, w.cwiseAbs().maxCoeff());
  if (w.minCoeff() < -tol) throw Error("covariance is not positive semidefinite");
  w = w.cwiseMax(0.0);
  return eig.eigenvectors() * w.cwiseSqrt().asDiagonal();
}

/// True when every eigenvalue exceeds a relative floor (safe to invert).
inline bool is_nonsingular(const Matrix& s) {
  Eigen::LLT<Matrix> llt(s);
  if (llt.info() != Eigen::Success) return false;
  const Vector diag = Matrix(llt.matrixL()).diagonal();
  return diag.minCoeff() > 1e-7 * std::sqrt(std::max(1e-300, s.diagonal().maxCoeff()));
}

}  // namespace wde
