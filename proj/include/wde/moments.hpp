#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "wde/error.hpp"
#include "wde/gaussian_model.hpp"
#include "wde/linalg.hpp"
#include "wde/monte_carlo.hpp"
#include "wde/weights.hpp"

namespace wde {

/// a * alpha + tr(M Phi): a linear functional of the weighted moments.
struct QuadForm {
  double a = 0.0;
  Matrix M;

  static QuadForm zero(int d) { return {0.0, Matrix::Zero(d, d)}; }

  QuadForm& operator+=(const QuadForm& o) {
    a += o.a;
    M += o.M;
    return *this;
  }
  QuadForm& operator-=(const QuadForm& o) {
    a -= o.a;
    M -= o.M;
    return *this;
  }
  QuadForm& operator*=(double s) {
    a *= s;
    M *= s;
    return *this;
  }
  friend QuadForm operator+(QuadForm x, const QuadForm& y) { return x += y; }
  friend QuadForm operator-(QuadForm x, const QuadForm& y) { return x -= y; }
  friend QuadForm operator*(QuadForm x, double s) { return x *= s; }
  friend QuadForm operator*(double s, QuadForm x) { return x *= s; }
};

/// Weighted entropy of X(S) with its reduced weight:
/// (alpha/2) ln[(2 pi)^|S| det C(S)] + 1/2 tr(C(S)^{-1} Phi(S)). Zero for empty S.
inline QuadForm joint_form(const PDMatrix& c, const IndexSet& s) {
  if (s.empty()) return QuadForm::zero(c.dim());
  const PDMatrix cs = submatrix(c, s);
  return {0.5 * (s.size() * std::log(kTwoPi) + log_det(cs)), 0.5 * embed(cs.inverse(), s)};
}

/// Conditional weighted entropy of X(S) given X(S^c).
inline QuadForm conditional_form(const PDMatrix& c, const IndexSet& s) {
  return joint_form(c, IndexSet::full(c.dim())) - joint_form(c, s.complement());
}

/// Mutual weighted entropy between X(S) and X(S^c), with the alpha(C) prefactor.
inline QuadForm mutual_form(const PDMatrix& c, const IndexSet& s) {
  const IndexSet rest = s.complement();
  QuadForm f{0.5 * (log_det(c, s) + log_det(c, rest) - log_det(c)), -0.5 * c.inverse()};
  if (!s.empty()) f.M += 0.5 * embed(submatrix(c, s).inverse(), s);
  if (!rest.empty()) f.M += 0.5 * embed(submatrix(c, rest).inverse(), rest);
  return f;
}

/// Weighted entropy functionals of one (C, phi) pair sharing a moment source.
class EntropyModel {
 public:
  EntropyModel(PDMatrix c, const WeightFunction& phi, const SampleSpec& spec)
      : c_(std::move(c)), source_(MomentSource::plain(c_, phi, spec)) {}

  const PDMatrix& cov() const { return c_; }
  int dim() const { return c_.dim(); }
  Method method() const { return source_.method(); }
  const MomentSource& source() const { return source_; }

  Quantity eval(const QuadForm& f) const { return source_.expect(f.a, f.M); }
  Quantity alpha() const { return source_.alpha(); }
  Quantity joint(const IndexSet& s) const { return eval(joint_form(c_, s)); }
  Quantity conditional(const IndexSet& s) const { return eval(conditional_form(c_, s)); }
  Quantity mutual(const IndexSet& s) const { return eval(mutual_form(c_, s)); }

 private:
  PDMatrix c_;
  MomentSource source_;
};

struct WeightedMoments {
  Estimate alpha;
  std::vector<std::vector<Estimate>> phi_matrix;
  Method method = Method::ClosedForm;

  Matrix phi_values() const {
    const auto d = static_cast<Eigen::Index>(phi_matrix.size());
    Matrix m(d, d);
    for (Eigen::Index i = 0; i < d; ++i) {
      for (Eigen::Index j = 0; j < d; ++j) {
        m(i, j) = phi_matrix[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)].value;
      }
    }
    return m;
  }
};

inline WeightedMoments moments_of(const MomentSource& src, int d) {
  WeightedMoments out;
  out.method = src.method();
  out.alpha = src.alpha().estimate();
  out.phi_matrix.assign(static_cast<std::size_t>(d), std::vector<Estimate>(static_cast<std::size_t>(d)));
  for (int i = 0; i < d; ++i) {
    for (int j = i; j < d; ++j) {
      Matrix m = Matrix::Zero(d, d);
      m(i, j) += 0.5;
      m(j, i) += 0.5;
      const Estimate e = src.expect(0.0, m).estimate();
      out.phi_matrix[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = e;
      out.phi_matrix[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)] = e;
    }
  }
  return out;
}

inline WeightedMoments weighted_moments(const PDMatrix& c, const WeightFunction& phi,
                                        const SampleSpec& spec) {
  return moments_of(MomentSource::plain(c, phi, spec), c.dim());
}

inline Estimate gaussian_we(const PDMatrix& c, const WeightFunction& phi, const SampleSpec& spec) {
  return EntropyModel(c, phi, spec).joint(IndexSet::full(c.dim())).estimate();
}

/// h(X_{p+1..d} | X_{1..p}) = sigma(C, phi) - sigma(C_1^p, psi) with psi the reduced weight.
inline Estimate conditional_we(const PDMatrix& c, int p, const WeightFunction& phi,
                               const SampleSpec& spec) {
  if (p < 1 || p >= c.dim()) throw Error("block split p must satisfy 1 <= p < d");
  const EntropyModel model(c, phi, spec);
  return model.conditional(IndexSet::range(c.dim(), p, c.dim())).estimate();
}

inline Estimate mutual_we(const PDMatrix& c, const IndexSet& s, const WeightFunction& phi,
                          const SampleSpec& spec) {
  if (s.empty() || s.size() == c.dim()) throw Error("subset must be proper and nonempty");
  return EntropyModel(c, phi, spec).mutual(s).estimate();
}

/// alpha ln[(2 pi)^d det C] + tr(C^{-1} Phi) - alpha ln[(2 pi)^p det C_1^p] - tr((C_1^p)^{-1} Phi_1^p).
inline QuadForm mu_form(const PDMatrix& c, int p) {
  const int d = c.dim();
  if (p < 1 || p > d) throw Error("block split p must satisfy 1 <= p <= d");
  const IndexSet head = IndexSet::range(d, 0, p);
  const PDMatrix ch = submatrix(c, head);
  return {d * std::log(kTwoPi) + log_det(c) - (p * std::log(kTwoPi) + log_det(ch)),
          c.inverse() - embed(ch.inverse(), head)};
}

inline Estimate mu(const PDMatrix& c, int p, const WeightFunction& phi, const SampleSpec& spec) {
  return EntropyModel(c, phi, spec).eval(mu_form(c, p)).estimate();
}

/// Last-coordinate conditional entropy display on the leading d-block of a source.
inline QuadForm varpi_form(const PDMatrix& c) {
  const int d = c.dim();
  if (d < 2) throw Error("varpi requires d >= 2");
  const IndexSet head = IndexSet::range(d, 0, d - 1);
  const PDMatrix ch = submatrix(c, head);
  return {0.5 * (d * std::log(kTwoPi) + log_det(c)) - 0.5 * ((d - 1) * std::log(kTwoPi) + log_det(ch)),
          0.5 * c.inverse() - 0.5 * embed(ch.inverse(), head)};
}

inline Estimate varpi(const PDMatrix& c, const WeightFunction& psi, const SampleSpec& spec) {
  return EntropyModel(c, psi, spec).eval(varpi_form(c)).estimate();
}

/// Same display for a derived weight, integrated jointly with its inner noise.
inline Quantity varpi(const PDMatrix& c, const AffineAverage& psi, const SampleSpec& spec) {
  if (psi.dim() != c.dim()) throw Error("dimension mismatch");
  const QuadForm f = varpi_form(c);
  return MomentSource::derived(psi, c.matrix(), spec).expect(f.a, f.M);
}

struct ChainValues {
  char label = 'h';
  int d = 0;
  std::vector<Estimate> values;  ///< entry k-1 holds the value at k
  std::vector<Quantity> quantities;
  Method method = Method::ClosedForm;
};

inline constexpr int kMaxChainDim = 16;

inline bool is_chain_label(char label) {
  return std::string("hgpqImsawuz").find(label) != std::string::npos;
}

/// Size-k subsets of {0..d-1} as bitmasks, in increasing numeric order.
inline std::vector<std::uint64_t> subsets_of_size(int d, int k) {
  std::vector<std::uint64_t> out;
  for (std::uint64_t m = 0; m < (std::uint64_t{1} << d); ++m) {
    if (std::popcount(m) == k) out.push_back(m);
  }
  return out;
}

/// Chain entries as quantities on a shared source.
inline std::vector<Quantity> chain_quantities(char label, const EntropyModel& model,
                                              std::optional<double> r) {
  const int d = model.dim();
  const PDMatrix& c = model.cov();
  if (!is_chain_label(label)) throw Error(std::string("unknown chain label '") + label + "'");
  if (d > kMaxChainDim) throw Error("subset enumeration cap exceeded");
  if ((label == 'g' || label == 's') && !(r && *r > 0.0)) {
    throw Error("chain requires r > 0");
  }
  const int kmax = (label == 'I' || label == 'z') ? d / 2 : d;
  std::vector<Quantity> out;
  for (int k = 1; k <= kmax; ++k) {
    if (label == 'a') {
      out.push_back(model.joint(IndexSet::range(d, 0, k)) * (2.0 / k));
      continue;
    }
    const auto masks = subsets_of_size(d, k);
    const double count = static_cast<double>(masks.size());
    if (label == 'g' || label == 's') {
      const double rr = *r;
      Quantity sum(0.0);
      for (std::uint64_t m : masks) {
        const IndexSet s = IndexSet::from_mask(d, m);
        Quantity per = model.joint(s) * (1.0 / k);
        sum += per.map([rr](double v) { return std::exp(rr * v); },
                       [rr](double v) { return rr * std::exp(rr * v); });
      }
      out.push_back(sum * (1.0 / count));
      continue;
    }
    QuadForm f = QuadForm::zero(d);
    for (std::uint64_t m : masks) {
      const IndexSet s = IndexSet::from_mask(d, m);
      switch (label) {
        case 'h':
          f += joint_form(c, s);
          break;
        case 'm': {
          // per-subset (alpha/2k) ln[(2 pi)^k det C(S)] + (1/2k) tr(C(S)^{-1} Phi(S))
          const PDMatrix cs = submatrix(c, s);
          f += QuadForm{0.5 * (k * std::log(kTwoPi) + log_det(cs)), 0.5 * embed(cs.inverse(), s)};
          break;
        }
        case 'p':
          f += conditional_form(c, s);
          break;
        case 'w': {
          // (alpha/2k) ln[(2 pi)^d det C / ((2 pi)^{d-k} det C(S^c))] + traces
          const IndexSet rest = s.complement();
          QuadForm t{0.5 * (k * std::log(kTwoPi) + log_det(c) - log_det(c, rest)), 0.5 * c.inverse()};
          if (!rest.empty()) t.M -= 0.5 * embed(submatrix(c, rest).inverse(), rest);
          f += t;
          break;
        }
        case 'q':
        case 'I':
          f += mutual_form(c, s);
          break;
        case 'u':
        case 'z': {
          const IndexSet rest = s.complement();
          QuadForm t{0.5 * (log_det(c, s) + log_det(c, rest) - log_det(c)), -0.5 * c.inverse()};
          t.M += 0.5 * embed(submatrix(c, s).inverse(), s);
          if (!rest.empty()) t.M += 0.5 * embed(submatrix(c, rest).inverse(), rest);
          f += t;
          break;
        }
        default:
          break;
      }
    }
    const double per_element = (label == 'I' || label == 'z') ? 1.0 : 1.0 / k;
    out.push_back(model.eval(f * (per_element / count)));
  }
  return out;
}

inline void require_toeplitz_chain(const PDMatrix& c, const WeightFunction& phi) {
  if (!is_toeplitz(c.matrix(), false)) throw Error("Toeplitz structure violation: C is not Toeplitz");
  if (!phi.tilt(c.dim())) throw Error("Toeplitz structure violation: weight has no closed form");
  if (!has_toeplitz_property(phi, c)) {
    throw Error("Toeplitz structure violation: reduced weights are not shift invariant");
  }
}

inline ChainValues chain(char label, const PDMatrix& c, const WeightFunction& phi,
                         const SampleSpec& spec, std::optional<double> r = std::nullopt) {
  if (c.dim() > kMaxChainDim) throw Error("subset enumeration cap exceeded");
  if (label == 'a') require_toeplitz_chain(c, phi);
  const EntropyModel model(c, phi, spec);
  ChainValues out;
  out.label = label;
  out.d = c.dim();
  out.method = model.method();
  out.quantities = chain_quantities(label, model, r);
  for (const Quantity& q : out.quantities) out.values.push_back(q.estimate());
  return out;
}

}  // namespace wde
