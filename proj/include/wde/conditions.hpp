#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "wde/error.hpp"
#include "wde/linalg.hpp"
#include "wde/moments.hpp"
#include "wde/monte_carlo.hpp"
#include "wde/scenario.hpp"
#include "wde/weights.hpp"

namespace wde {

/// coef * integral of phi(x) (a + xᵀ M x) against N(0, cov).
struct GaussTerm {
  GaussTerm(double coef_, Matrix cov_, double a_ = 1.0, Matrix m_ = Matrix())
      : coef(coef_), cov(std::move(cov_)), a(a_), M(std::move(m_)) {}

  double coef;
  Matrix cov;
  double a;
  Matrix M;  ///< empty means zero
};

/// One signed inequality: sum of terms compared with zero.
struct ConditionPart {
  std::string label;
  Direction direction = Direction::NonNegative;
  std::vector<GaussTerm> terms;
  bool trivial = false;  ///< both densities coincide; value is exactly 0
};

struct PartReport {
  std::string label;
  Estimate estimate;
  Direction direction;
  Verdict verdict;
};

struct ConditionReport {
  std::string id;
  std::vector<PartReport> parts;
  Verdict verdict = Verdict::Holds;
  Method method = Method::ClosedForm;
};

struct ConditionInfo {
  std::string id;
  std::string description;
  std::vector<std::string> fields;
};

inline const std::vector<ConditionInfo>& list_conditions() {
  static const std::vector<ConditionInfo> table = {
      {"C1.6", "weighted Gibbs pair for the mixture lambda C1 + (1-lambda) C2 (two parts)",
       {"C1", "C2", "lambda", "wf"}},
      {"C2.8", "reduced weight favours C(S) over the dependence-broken product, all i in S",
       {"C", "wf"}},
      {"C2.15", "weight favours the joint density over the product of marginals", {"C", "wf"}},
      {"C2.20", "weight favours C(S) over the law with X_i, X_j conditionally independent",
       {"C", "wf"}},
      {"C3.1", "Gibbs pair against the two-component Gaussian mixture f (two parts)",
       {"C1", "C2", "lambda", "wf"}},
      {"C3.5", "conditional Gibbs pair against the mixture, block split p (two parts)",
       {"C1", "C2", "lambda", "p", "wf"}},
      {"C5.3", "pair weight on (X, Y) favours independence over the X+Y coupling",
       {"C1", "C2", "wf"}},
      {"C5.12", "Gaussian broken-dependence condition, all i in S", {"C", "wf"}},
      {"C5.20", "weight favours C over diag(C)", {"C", "wf"}},
      {"C5.24", "Gaussian broken pairwise conditional dependence, all S and i < j", {"C", "wf"}},
      {"C6.3", "reduced weights on {1..i} u {p+1..d} favour the joint law, i = 1..p",
       {"C", "p", "wf"}},
      {"C6.11", "leading-block conditional comparison against the mixture",
       {"C1", "C2", "lambda", "p", "wf"}},
      {"C6.12", "Schur-residual quadratic comparison against the mixture",
       {"C1", "C2", "lambda", "p", "wf"}},
      {"C6.17", "last-coordinate conditional law of X+Y given (X', Y') versus given Z'",
       {"A", "B", "wf"}},
  };
  return table;
}

inline constexpr int kMaxQuantifiedDim = 8;

namespace detail {

/// Covariance on R^d with x(S) ~ N(0, sig_s) and x(S^c) | x(S) from the model C.
inline Matrix lift(const Matrix& c, const IndexSet& s, const Matrix& sig_s) {
  if (s.size() == s.dim()) return sig_s;
  const IndexSet rest = s.complement();
  const Regression r = regression(c, s, rest);
  const Matrix cross = r.B * sig_s;
  Matrix out(s.dim(), s.dim());
  for (int a = 0; a < s.size(); ++a) {
    for (int b = 0; b < s.size(); ++b) out(s[a], s[b]) = sig_s(a, b);
    for (int b = 0; b < rest.size(); ++b) {
      out(rest[b], s[a]) = cross(b, a);
      out(s[a], rest[b]) = cross(b, a);
    }
  }
  const Matrix tail = cross * r.B.transpose() + r.K;
  for (int a = 0; a < rest.size(); ++a) {
    for (int b = 0; b < rest.size(); ++b) out(rest[a], rest[b]) = tail(a, b);
  }
  return out;
}

/// Law of N(0, sig) with B1 and B2 made conditionally independent given A.
inline Matrix break_dependence(const Matrix& sig, const IndexSet& a, const IndexSet& b1,
                               const IndexSet& b2) {
  Matrix out = sig;
  Matrix cross = Matrix::Zero(b1.size(), b2.size());
  if (!a.empty()) {
    const PDMatrix saa(principal(sig, a));
    cross = block(sig, b1, a) * saa.solve(block(sig, a, b2));
  }
  for (int i = 0; i < b1.size(); ++i) {
    for (int j = 0; j < b2.size(); ++j) {
      out(b1[i], b2[j]) = cross(i, j);
      out(b2[j], b1[i]) = cross(i, j);
    }
  }
  return out;
}

inline bool same_matrix(const Matrix& x, const Matrix& y) {
  return x.rows() == y.rows() && x.cols() == y.cols() && (x.array() == y.array()).all();
}

/// Exact value for a tilted weight. Terms sharing (a, M) are summed through their
/// second-moment matrices first so that equal-mass differences cancel exactly.
inline double closed_form_part(const ConditionPart& part, const Tilt& tilt) {
  double total = 0.0;
  std::size_t i = 0;
  while (i < part.terms.size()) {
    const GaussTerm& head = part.terms[i];
    double mass = 0.0;
    Matrix second = Matrix::Zero(head.cov.rows(), head.cov.cols());
    std::size_t j = i;
    for (; j < part.terms.size(); ++j) {
      const GaussTerm& t = part.terms[j];
      if (t.a != head.a || !same_matrix(t.M, head.M)) break;
      const Vector mu = t.cov * tilt.t;
      const double alpha = tilt.c * std::exp(0.5 * tilt.t.dot(mu));
      const double w = t.coef * alpha;
      mass += w;
      if (head.M.size()) second += w * (t.cov + mu * mu.transpose());
    }
    total += head.a * mass;
    if (head.M.size()) total += (head.M * second).trace();
    i = j;
  }
  return total;
}

inline double log_sum_exp(const std::vector<double>& v) {
  const double m = *std::max_element(v.begin(), v.end());
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

/// Sample-based value. Distinct covariances form an equal-weight stratified mixture
/// proposal; singular covariances fall back to common draws pushed through each term.
inline Quantity sampled_part(const ConditionPart& part, const WeightFunction& phi,
                             const SampleSpec& spec) {
  std::vector<Matrix> covs;
  std::vector<std::size_t> which;
  for (const GaussTerm& t : part.terms) {
    std::size_t k = 0;
    while (k < covs.size() && !same_matrix(covs[k], t.cov)) ++k;
    if (k == covs.size()) covs.push_back(t.cov);
    which.push_back(k);
  }
  const int m = static_cast<int>(covs.front().rows());
  const Matrix g = standard_normals(m, spec);
  const std::size_t n = spec.n_samples;
  std::vector<double> values(n, 0.0);

  auto quad = [](const GaussTerm& t, const Vector& x) {
    return t.a + (t.M.size() ? x.dot(t.M * x) : 0.0);
  };
  auto check = [](double v, std::size_t i) {
    if (!std::isfinite(v)) throw Error("integrand not finite at sample " + std::to_string(i));
    return v;
  };

  const bool regular = std::all_of(covs.begin(), covs.end(), is_nonsingular);
  if (!regular) {
    std::vector<Matrix> factors;
    for (const Matrix& c : covs) factors.push_back(psd_factor(c));
    for (std::size_t i = 0; i < n; ++i) {
      const auto gi = g.col(static_cast<Eigen::Index>(i));
      std::vector<double> wcache(covs.size(), -1.0);
      std::vector<Vector> xcache(covs.size());
      double v = 0.0;
      for (std::size_t t = 0; t < part.terms.size(); ++t) {
        const std::size_t k = which[t];
        if (wcache[k] < 0.0) {
          xcache[k] = factors[k] * gi;
          wcache[k] = phi(xcache[k]);
        }
        v += part.terms[t].coef * wcache[k] * quad(part.terms[t], xcache[k]);
      }
      values[i] = check(v, i);
    }
    return Quantity(std::move(values), spec.seed);
  }

  std::vector<PDMatrix> pds;
  for (const Matrix& c : covs) pds.emplace_back(c);
  const double k_count = static_cast<double>(covs.size());
  std::vector<double> logf(covs.size());
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t comp = i % covs.size();
    const Vector x = pds[comp].chol() * g.col(static_cast<Eigen::Index>(i));
    for (std::size_t k = 0; k < pds.size(); ++k) {
      const Vector y = pds[k].chol().triangularView<Eigen::Lower>().solve(x);
      logf[k] = -0.5 * (m * std::log(kTwoPi) + log_det(pds[k]) + y.squaredNorm());
    }
    const double logq = log_sum_exp(logf) - std::log(k_count);
    const double w = phi(x);
    double v = 0.0;
    for (std::size_t t = 0; t < part.terms.size(); ++t) {
      v += part.terms[t].coef * std::exp(logf[which[t]] - logq) * quad(part.terms[t], x);
    }
    values[i] = check(w * v, i);
  }
  return Quantity(std::move(values), spec.seed);
}

struct Built {
  int dim;  ///< ambient dimension of the weight argument
  std::vector<ConditionPart> parts;
};

inline IndexSet local_positions(const IndexSet& s, const std::function<bool(int)>& pick) {
  std::vector<int> pos;
  for (int a = 0; a < s.size(); ++a) {
    if (pick(s[a])) pos.push_back(a);
  }
  return IndexSet(s.size(), std::move(pos));
}

/// +C(S) lifted versus the broken law lifted.
inline ConditionPart broken_part(const PDMatrix& c, const IndexSet& s, const IndexSet& a,
                                 const IndexSet& b1, const IndexSet& b2, std::string label) {
  ConditionPart part{std::move(label), Direction::NonNegative, {}, b1.empty() || b2.empty()};
  if (part.trivial) return part;
  const Matrix cs = principal(c.matrix(), s);
  part.terms.push_back({1.0, lift(c.matrix(), s, cs)});
  part.terms.push_back({-1.0, lift(c.matrix(), s, break_dependence(cs, a, b1, b2))});
  return part;
}

inline void require_quantified_dim(int d) {
  if (d > kMaxQuantifiedDim) throw Error("quantifier blowup: d > 8 for a quantified condition");
}

inline Built build_sequential(const PDMatrix& c) {
  const int d = c.dim();
  require_quantified_dim(d);
  Built out{d, {}};
  for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << d); ++mask) {
    const IndexSet s = IndexSet::from_mask(d, mask);
    for (int i : s.members()) {
      const IndexSet a = local_positions(s, [i](int j) { return j < i; });
      const IndexSet b1 = local_positions(s, [i](int j) { return j == i; });
      const IndexSet b2 = local_positions(s, [i](int j) { return j > i; });
      out.parts.push_back(
          broken_part(c, s, a, b1, b2, "S=" + s.to_string() + " i=" + std::to_string(i + 1)));
    }
  }
  return out;
}

inline Built build_pairwise(const PDMatrix& c) {
  const int d = c.dim();
  require_quantified_dim(d);
  Built out{d, {}};
  for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << d); ++mask) {
    const IndexSet s = IndexSet::from_mask(d, mask);
    if (s.size() < 2) continue;
    for (int x = 0; x < s.size(); ++x) {
      for (int y = x + 1; y < s.size(); ++y) {
        const int i = s[x], j = s[y];
        const IndexSet a = local_positions(s, [i, j](int k) { return k != i && k != j; });
        out.parts.push_back(broken_part(c, s, a, IndexSet(s.size(), {x}), IndexSet(s.size(), {y}),
                                        "S=" + s.to_string() + " i=" + std::to_string(i + 1) +
                                            " j=" + std::to_string(j + 1)));
      }
    }
  }
  return out;
}

inline Built build_product(const PDMatrix& c) {
  ConditionPart part{"C vs diag(C)", Direction::NonNegative, {}, false};
  const Matrix diag = c.matrix().diagonal().asDiagonal();
  part.trivial = same_matrix(diag, c.matrix());
  if (!part.trivial) {
    part.terms.push_back({1.0, c.matrix()});
    part.terms.push_back({-1.0, diag});
  }
  return {c.dim(), {std::move(part)}};
}

inline Built build_wshi(const PDMatrix& c, int p) {
  const int d = c.dim();
  Built out{d, {}};
  for (int i = 0; i < p; ++i) {
    std::vector<int> members;
    for (int j = 0; j <= i; ++j) members.push_back(j);
    for (int j = p; j < d; ++j) members.push_back(j);
    const IndexSet s(d, members);
    const IndexSet a = local_positions(s, [p](int j) { return j >= p; });
    const IndexSet b1 = local_positions(s, [i](int j) { return j == i; });
    const IndexSet b2 = local_positions(s, [i](int j) { return j < i; });
    out.parts.push_back(broken_part(c, s, a, b1, b2, "i=" + std::to_string(i + 1)));
  }
  return out;
}

struct Mixture {
  PDMatrix c1, c2;
  double l1, l2;
  Matrix c;  ///< l1 C1 + l2 C2
};

inline Mixture mixture_of(const Scenario& sc) {
  Mixture m{sc.pd("C1"), sc.pd("C2"), sc.require_lambda(), 0.0, Matrix()};
  if (m.c1.dim() != m.c2.dim()) throw ConfigError("C1 and C2 must have the same dimension");
  m.l2 = 1.0 - m.l1;
  m.c = m.l1 * m.c1.matrix() + m.l2 * m.c2.matrix();
  return m;
}

inline std::vector<GaussTerm> mixture_terms(const Mixture& m, double a, const Matrix& q) {
  return {{m.l1, m.c1.matrix(), a, q}, {m.l2, m.c2.matrix(), a, q}, {-1.0, m.c, a, q}};
}

inline Built build_gibbs(const Scenario& sc) {
  const Mixture m = mixture_of(sc);
  const int d = m.c1.dim();
  const PDMatrix c(m.c);
  const double big_l = d * std::log(kTwoPi) + log_det(c);
  Built out{d, {}};
  out.parts.push_back({"alpha gap", Direction::NonNegative, mixture_terms(m, 1.0, Matrix()), false});
  out.parts.push_back(
      {"log-det and trace gap", Direction::NonPositive, mixture_terms(m, big_l, c.inverse()), false});
  return out;
}

inline Built build_mixture_gibbs(const Scenario& sc) {
  const Mixture m = mixture_of(sc);
  const int d = m.c1.dim();
  const PDMatrix c(m.c);
  const double big_l = d * std::log(kTwoPi) + log_det(c);
  Built out{d, {}};
  out.parts.push_back({"alpha gap", Direction::NonNegative, mixture_terms(m, 1.0, Matrix()), false});
  out.parts.push_back({"log-det and trace gap", Direction::NonPositive,
                       mixture_terms(m, big_l, -c.inverse()), false});
  return out;
}

inline ConditionPart mixture_conditional_part(const Mixture& m, int p) {
  const int d = m.c1.dim();
  const IndexSet head = IndexSet::range(d, 0, p);
  ConditionPart part{"leading-block conditional gap", Direction::NonNegative, {}, false};
  part.terms.push_back({m.l1, m.c1.matrix()});
  part.terms.push_back({m.l2, m.c2.matrix()});
  part.terms.push_back({-m.l1, lift(m.c, head, principal(m.c1.matrix(), head))});
  part.terms.push_back({-m.l2, lift(m.c, head, principal(m.c2.matrix(), head))});
  return part;
}

inline ConditionPart mixture_residual_part(const Mixture& m, int p) {
  const int d = m.c1.dim();
  const ConditionalParams cp = conditional_params(PDMatrix(m.c), p);
  Matrix proj(p, d);
  proj << Matrix::Identity(p, p), -cp.D;
  const Matrix q = proj.transpose() * cp.K.inverse() * proj;
  const double a = p * std::log(kTwoPi) - log_det(cp.K);
  ConditionPart part{"Schur-residual quadratic gap", Direction::NonPositive, {}, false};
  part.terms = mixture_terms(m, a, 0.5 * (q + q.transpose()));
  return part;
}

inline Built build_sum_coupling(const Scenario& sc) {
  const PDMatrix c1 = sc.pd("C1");
  const Matrix& c2 = sc.matrix("C2");
  const int d = c1.dim();
  if (c2.rows() != d || c2.cols() != d) throw ConfigError("C1 and C2 must have the same dimension");
  Matrix indep = Matrix::Zero(2 * d, 2 * d), coupled(2 * d, 2 * d);
  indep.topLeftCorner(d, d) = c1.matrix();
  indep.bottomRightCorner(d, d) = c2;
  coupled << c1.matrix() + 2.0 * c2, -c2, -c2, c2;
  ConditionPart part{"independent vs sum-coupled", Direction::NonNegative, {}, false};
  part.terms.push_back({1.0, indep});
  part.terms.push_back({-1.0, coupled});
  return {2 * d, {std::move(part)}};
}

inline Built build_last_coordinate(const Scenario& sc) {
  const PDMatrix a = sc.pd("A");
  const PDMatrix b = sc.pd("B");
  const int d = a.dim();
  if (b.dim() != d) throw ConfigError("A and B must have the same dimension");
  const int q = d - 1;
  const Matrix& am = a.matrix();
  const Matrix& bm = b.matrix();
  // coordinates (z_d, x', y')
  Matrix first = Matrix::Zero(2 * d - 1, 2 * d - 1);
  first(0, 0) = am(q, q) + bm(q, q);
  first.block(0, 1, 1, q) = am.block(q, 0, 1, q);
  first.block(0, 1 + q, 1, q) = bm.block(q, 0, 1, q);
  first.block(1, 0, q, 1) = am.block(0, q, q, 1);
  first.block(1 + q, 0, q, 1) = bm.block(0, q, q, 1);
  first.block(1, 1, q, q) = am.topLeftCorner(q, q);
  first.block(1 + q, 1 + q, q, q) = bm.topLeftCorner(q, q);

  Matrix second = first;
  if (q > 0) {
    const Matrix s = am + bm;
    const PDMatrix s1(s.topLeftCorner(q, q));
    const Vector beta = s1.solve(s.block(0, q, q, 1));
    const double resid = s(q, q) - (s.block(q, 0, 1, q) * beta)(0);
    const Matrix a1 = am.topLeftCorner(q, q), b1 = bm.topLeftCorner(q, q);
    second(0, 0) = beta.dot((a1 + b1) * beta) + resid;
    second.block(0, 1, 1, q) = (a1 * beta).transpose();
    second.block(0, 1 + q, 1, q) = (b1 * beta).transpose();
    second.block(1, 0, q, 1) = a1 * beta;
    second.block(1 + q, 0, q, 1) = b1 * beta;
  }
  ConditionPart part{"given (X', Y') vs given Z'", Direction::NonNegative, {}, q == 0};
  if (!part.trivial) {
    part.terms.push_back({1.0, first});
    part.terms.push_back({-1.0, second});
  }
  return {2 * d - 1, {std::move(part)}};
}

inline Built build(std::string_view id, const Scenario& sc) {
  if (id == "C1.6") return build_gibbs(sc);
  if (id == "C2.8" || id == "C5.12") return build_sequential(sc.pd("C"));
  if (id == "C2.15" || id == "C5.20") return build_product(sc.pd("C"));
  if (id == "C2.20" || id == "C5.24") return build_pairwise(sc.pd("C"));
  if (id == "C3.1") return build_mixture_gibbs(sc);
  if (id == "C3.5" || id == "C6.11" || id == "C6.12") {
    const Mixture m = mixture_of(sc);
    const int p = sc.require_p(m.c1.dim());
    Built out{m.c1.dim(), {}};
    if (id != "C6.12") out.parts.push_back(mixture_conditional_part(m, p));
    if (id != "C6.11") out.parts.push_back(mixture_residual_part(m, p));
    return out;
  }
  if (id == "C5.3") return build_sum_coupling(sc);
  if (id == "C6.3") {
    const PDMatrix c = sc.pd("C");
    return build_wshi(c, sc.require_p(c.dim()));
  }
  if (id == "C6.17") return build_last_coordinate(sc);
  throw ConfigError("unknown id '" + std::string(id) + "'");
}

}  // namespace detail

/// Evaluates every part of a condition and its signed verdicts.
inline ConditionReport check(std::string_view id, const Scenario& sc, const EvalOptions& opt) {
  const detail::Built built = detail::build(id, sc);
  const WeightFunction phi = opt.prepare(sc.wf, built.dim);
  const auto tilt = phi.tilt(built.dim);
  ConditionReport rep;
  rep.id = std::string(id);
  rep.method = tilt ? Method::ClosedForm : Method::MonteCarlo;
  std::vector<Estimate> values(built.parts.size());
  // Instances run concurrently; each sampled instance draws from its own derived seed.
  parallel_for(built.parts.size(), opt.sampling.threads, [&](std::size_t k) {
    const ConditionPart& part = built.parts[k];
    const std::uint64_t seed = derive_seed(opt.sampling.seed, k);
    if (part.trivial) {
      values[k] = Estimate{0.0, 0.0, 0, seed};
    } else if (tilt) {
      values[k] = Estimate{detail::closed_form_part(part, *tilt), 0.0, 0, seed};
    } else {
      SampleSpec spec = opt.sampling.with_seed(seed);
      spec.threads = 1;
      values[k] = detail::sampled_part(part, phi, spec).estimate();
    }
  });
  std::vector<Verdict> verdicts;
  for (std::size_t k = 0; k < built.parts.size(); ++k) {
    const ConditionPart& part = built.parts[k];
    const Verdict v = opt.verdict(values[k], part.direction);
    rep.parts.push_back({part.label, values[k], part.direction, v});
    verdicts.push_back(v);
  }
  rep.verdict = combine(verdicts);
  return rep;
}

}  // namespace wde
