#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "wde/conditions.hpp"
#include "wde/error.hpp"
#include "wde/gaussian_model.hpp"
#include "wde/linalg.hpp"
#include "wde/moments.hpp"
#include "wde/monte_carlo.hpp"
#include "wde/scenario.hpp"
#include "wde/weights.hpp"

namespace wde {

struct InequalityReport {
  std::string id;
  Estimate lhs;  ///< left-hand side as written
  Estimate rhs;
  Estimate margin;  ///< >= 0 (or = 0 for identities) when the inequality holds
  Direction direction = Direction::NonNegative;
  std::vector<Estimate> chain_values;   ///< chains and the sandwich: the ordered terms
  std::vector<Estimate> chain_margins;  ///< consecutive oriented differences
  std::vector<Verdict> chain_verdicts;
  std::vector<ConditionReport> prerequisites;
  Verdict verdict = Verdict::Holds;
  std::string note;
  Method method = Method::ClosedForm;

  /// Holds if every prerequisite holds (or there are none).
  Verdict condition_verdict() const {
    std::vector<Verdict> v;
    for (const ConditionReport& c : prerequisites) v.push_back(c.verdict);
    return combine(v);
  }
};

struct InequalityInfo {
  std::string id;
  std::string description;
  std::vector<std::string> fields;
  std::vector<std::string> prerequisites;
};

inline const std::vector<InequalityInfo>& list_inequalities() {
  static const std::vector<InequalityInfo> table = {
      {"KyFanW", "weighted concavity of log det, in units of 2 sigma", {"C1", "C2", "lambda", "wf"}, {"C1.6"}},
      {"KyFanStd", "concavity of log det (weight ignored)", {"C1", "C2", "lambda"}, {}},
      {"Thm5.1", "log-det ratio for the sum of independent Gaussians with pair weight", {"C1", "C2", "wf"}, {"C5.3"}},
      {"Thm5.1alt", "same bound split through Theta = Theta* + Theta~", {"C1", "C2", "wf"}, {"C5.3"}},
      {"Rank1", "same bound for a rank-one C2 = E via Sherman-Morrison", {"C1", "E", "wf"}, {"C5.3"}},
      {"SzaszM", "m(k) decreasing in k", {"C", "wf"}, {"C5.12"}},
      {"SzaszS", "s(k) decreasing in k", {"C", "r", "wf"}, {"C5.12"}},
      {"ToeplitzA", "a(k) decreasing in k for Toeplitz C with shift-invariant reduced weights", {"C", "wf"}, {"C5.12"}},
      {"WChain", "w(k) increasing in k", {"C", "wf"}, {"C5.20"}},
      {"UChain", "u(k) decreasing in k", {"C", "wf"}, {"C5.24"}},
      {"ZChain", "z(k) increasing in k up to d/2", {"C", "wf"}, {"C5.24"}},
      {"WHI", "weighted Hadamard inequality", {"C", "wf"}, {"C5.20"}},
      {"WSHI", "weighted strong Hadamard inequality with block split p", {"C", "p", "wf"}, {"C6.3"}},
      {"Identity6.7", "last-coordinate chain-rule identity", {"C", "wf"}, {}},
      {"Concavity", "mu(C) concave along lambda C1 + (1-lambda) C2", {"C1", "C2", "lambda", "p", "wf"}, {"C6.11", "C6.12"}},
      {"Superadd", "varpi superadditivity in the (psi, chi, gamma) form", {"A", "B", "wf"}, {"C6.17"}},
      {"Sandwich", "conditional-variance bound, joint term, Hadamard bound in order", {"C", "wf"}, {"C5.20"}},
      {"Chain2.9", "h(k) decreasing in k", {"C", "wf"}, {"C2.8"}},
      {"Chain2.13", "g(k) decreasing in k", {"C", "r", "wf"}, {"C2.8"}},
      {"Chain2.16", "p(k) increasing in k", {"C", "wf"}, {"C2.15"}},
      {"Chain2.19", "q(k) decreasing in k", {"C", "wf"}, {"C2.8"}},
      {"Chain2.22", "I(k) increasing in k up to d/2", {"C", "wf"}, {"C2.20"}},
  };
  return table;
}

inline const InequalityInfo& inequality_info(std::string_view id) {
  for (const InequalityInfo& info : list_inequalities()) {
    if (info.id == id) return info;
  }
  throw ConfigError("unknown id '" + std::string(id) + "'");
}

namespace detail {

struct Sides {
  Quantity lhs, rhs;
  bool lhs_larger = true;  ///< false for inequalities written as lhs <= rhs
  Direction direction = Direction::NonNegative;
  Method method = Method::ClosedForm;
};

inline Method worse(Method a, Method b) {
  return a == Method::MonteCarlo || b == Method::MonteCarlo ? Method::MonteCarlo : Method::ClosedForm;
}

inline Matrix block_diag(const Matrix& a, const Matrix& b) {
  Matrix out = Matrix::Zero(a.rows() + b.rows(), a.cols() + b.cols());
  out.topLeftCorner(a.rows(), a.cols()) = a;
  out.bottomRightCorner(b.rows(), b.cols()) = b;
  return out;
}

inline Sides ky_fan_weighted(const Scenario& sc, const EvalOptions& opt) {
  const Mixture m = mixture_of(sc);
  const int d = m.c1.dim();
  const WeightFunction phi = opt.prepare(sc.wf, d);
  const IndexSet all = IndexSet::full(d);
  const EntropyModel mc(PDMatrix(m.c), phi, opt.sampling);
  const EntropyModel m1(m.c1, phi, opt.sampling);
  const EntropyModel m2(m.c2, phi, opt.sampling);
  Sides s{mc.joint(all) * 2.0, (m1.joint(all) * m.l1 + m2.joint(all) * m.l2) * 2.0};
  s.method = worse(mc.method(), worse(m1.method(), m2.method()));
  return s;
}

inline Sides ky_fan_standard(const Scenario& sc) {
  const Mixture m = mixture_of(sc);
  return {Quantity(log_det(PDMatrix(m.c))),
          Quantity(m.l1 * log_det(m.c1) + m.l2 * log_det(m.c2))};
}

/// Moments of a pair weight on W = (X, Y) ~ N(0, blockdiag(C1, C2)).
struct PairModel {
  PDMatrix c1;
  Matrix c2;
  PDMatrix sum;
  MomentSource source;

  PairModel(PDMatrix a, Matrix b, const WeightFunction& phi, const EvalOptions& opt)
      : c1(std::move(a)),
        c2(std::move(b)),
        sum(c1.matrix() + c2),
        source(block_diag(c1.matrix(), c2), Matrix::Identity(2 * c1.dim(), 2 * c1.dim()),
               opt.prepare(phi, 2 * c1.dim()), opt.sampling) {}

  int dim() const { return c1.dim(); }
  Quantity beta() const { return source.alpha(); }
  /// tr(Q Theta): Theta is the second moment of X + Y.
  Quantity theta(const Matrix& q) const {
    Matrix m(2 * dim(), 2 * dim());
    m << q, q, q, q;
    return source.expect(0.0, m);
  }
  /// tr(Q Theta*): Theta* is the second moment of X.
  Quantity theta_star(const Matrix& q) const {
    return source.expect(0.0, block_diag(q, Matrix::Zero(dim(), dim())));
  }
  /// tr(Q Theta~): the cross and Y terms.
  Quantity theta_tilde(const Matrix& q) const {
    Matrix m(2 * dim(), 2 * dim());
    m << Matrix::Zero(dim(), dim()), q, q, q;
    return source.expect(0.0, m);
  }
};

inline PairModel pair_model(const Scenario& sc, const std::string& second, const EvalOptions& opt) {
  PDMatrix c1 = sc.pd("C1");
  const Matrix& c2 = sc.matrix(second);
  if (c2.rows() != c1.dim() || c2.cols() != c1.dim()) {
    throw ConfigError("C1 and " + second + " must have the same dimension");
  }
  return PairModel(std::move(c1), c2, sc.wf, opt);
}

inline Sides thm51(const Scenario& sc, const EvalOptions& opt) {
  const PairModel pm = pair_model(sc, "C2", opt);
  const double ratio = log_det(pm.sum) - log_det(pm.c1);
  Sides s{pm.beta() * ratio + pm.theta(pm.sum.inverse()), pm.theta_star(pm.c1.inverse())};
  s.method = pm.source.method();
  return s;
}

inline Sides thm51_alt(const Scenario& sc, const EvalOptions& opt) {
  const PairModel pm = pair_model(sc, "C2", opt);
  const int d = pm.dim();
  const Matrix id = Matrix::Identity(d, d);
  const double ld = std::log(std::abs((id + pm.c1.solve(pm.c2)).partialPivLu().determinant()));
  const Matrix q = pm.sum.inverse();
  Sides s{pm.beta() * ld + pm.theta_star(q) + pm.theta_tilde(q), pm.theta_star(pm.c1.inverse())};
  s.method = pm.source.method();
  return s;
}

inline Sides rank_one(const Scenario& sc, const EvalOptions& opt) {
  const Matrix& e = sc.matrix("E");
  const RankOne r1 = rank_one_factor(e);
  if (r1.sign < 0) throw ConfigError("E must be positive semidefinite rank one");
  const PairModel pm = pair_model(sc, "E", opt);
  const Matrix c1_inv = pm.c1.inverse();
  const double g = (e * c1_inv).trace();
  const Matrix down = c1_inv * e * c1_inv / (1.0 + g);
  Sides s{pm.beta() * std::log1p(g) + pm.theta_tilde(sherman_morrison_inverse(pm.c1, e)),
          pm.theta_star(0.5 * (down + down.transpose()))};
  s.method = pm.source.method();
  return s;
}

inline QuadForm whi_form(const PDMatrix& c, double sign) {
  const Matrix& m = c.matrix();
  const Vector diag = m.diagonal();
  return {sign * diag.array().log().sum(), sign * Matrix(diag.cwiseInverse().asDiagonal())};
}

inline Sides whi(const Scenario& sc, const EvalOptions& opt) {
  const PDMatrix c = sc.pd("C");
  const EntropyModel model(c, opt.prepare(sc.wf, c.dim()), opt.sampling);
  Sides s{model.eval(whi_form(c, 1.0)), model.eval(QuadForm{log_det(c), c.inverse()})};
  const Matrix& m = c.matrix();
  if (m.isApprox(Matrix(m.diagonal().asDiagonal()), 0.0)) s.direction = Direction::Zero;
  s.method = model.method();
  return s;
}

inline Sides wshi(const Scenario& sc, const EvalOptions& opt) {
  const PDMatrix c = sc.pd("C");
  const int d = c.dim();
  const int p = sc.require_p(d);
  const EntropyModel model(c, opt.prepare(sc.wf, d), opt.sampling);
  const IndexSet tail = IndexSet::range(d, p, d);
  QuadForm left = joint_form(c, IndexSet::full(d)) * 2.0 + joint_form(c, tail) * (2.0 * (p - 1));
  QuadForm right = QuadForm::zero(d);
  for (int i = 0; i < p; ++i) {
    std::vector<int> members{i};
    for (int j = p; j < d; ++j) members.push_back(j);
    right += joint_form(c, IndexSet(d, members)) * 2.0;
  }
  Sides s{model.eval(left), model.eval(right), false};
  s.method = model.method();
  return s;
}

inline Sides identity67(const Scenario& sc, const EvalOptions& opt) {
  const PDMatrix c = sc.pd("C");
  const int d = c.dim();
  const EntropyModel model(c, opt.prepare(sc.wf, d), opt.sampling);
  const IndexSet head = IndexSet::range(d, 0, d - 1);
  const IndexSet last(d, {d - 1});
  const Regression reg = regression(c.matrix(), head, last);
  const double v = reg.K(0, 0);
  Vector resid = Vector::Zero(d);  // X_d minus its regression on the head
  resid(d - 1) = 1.0;
  for (int j = 0; j < d - 1; ++j) resid(j) = -reg.B(0, j);

  const double two_pi = std::log(kTwoPi);
  const double a = std::log(kTwoPi * v) + ((d - 1) * two_pi + log_det(c, head)) -
                   (d * two_pi + log_det(c));
  Matrix m = c.inverse() - resid * resid.transpose() / v;
  if (d > 1) m -= embed(submatrix(c, head).inverse(), head);
  Sides s{model.eval(QuadForm{a, Matrix::Zero(d, d)}), Quantity(0.0)};
  s.rhs = model.eval(QuadForm{0.0, m});
  s.direction = Direction::Zero;
  s.method = model.method();
  return s;
}

inline Sides concavity(const Scenario& sc, const EvalOptions& opt) {
  const Mixture m = mixture_of(sc);
  const int d = m.c1.dim();
  const int p = sc.require_p(d, true);
  const WeightFunction phi = opt.prepare(sc.wf, d);
  const PDMatrix c(m.c);
  const EntropyModel mc(c, phi, opt.sampling);
  const EntropyModel m1(m.c1, phi, opt.sampling);
  const EntropyModel m2(m.c2, phi, opt.sampling);
  Sides s{mc.eval(mu_form(c, p)),
          m1.eval(mu_form(m.c1, p)) * m.l1 + m2.eval(mu_form(m.c2, p)) * m.l2};
  s.method = worse(mc.method(), worse(m1.method(), m2.method()));
  return s;
}

struct SuperaddResult {
  Sides sides;
  Quantity statement_rhs;  ///< varpi_psi(A) + varpi_psi(B)
};

inline SuperaddResult superadd(const Scenario& sc, const EvalOptions& opt) {
  const PDMatrix a = sc.pd("A");
  const PDMatrix b = sc.pd("B");
  const int d = a.dim();
  if (b.dim() != d) throw ConfigError("A and B must have the same dimension");
  if (d < 2) throw ConfigError("Superadd requires d >= 2");
  const WeightFunction phi = opt.prepare(sc.wf, 2 * d - 1);
  const SuperaddWeights w = superadd_weights(phi, a, b, opt.sampling);
  const PDMatrix ab(a.matrix() + b.matrix());
  SuperaddResult out{{varpi(ab, w.psi, opt.sampling),
                      varpi(a, w.chi, opt.sampling) + varpi(b, w.gamma, opt.sampling)},
                     varpi(a, w.psi, opt.sampling) + varpi(b, w.psi, opt.sampling)};
  out.sides.method = w.psi.method();
  return out;
}

/// Sandwich terms T1 <= T2 <= T3.
inline std::vector<Quantity> sandwich_terms(const PDMatrix& c, const EntropyModel& model) {
  const int d = c.dim();
  const double two_pi = std::log(kTwoPi);
  QuadForm t1 = QuadForm::zero(d);
  for (int i = 0; i < d; ++i) {
    const IndexSet rest = IndexSet(d, {i}).complement();
    QuadForm term{two_pi + log_det(c) - log_det(c, rest), c.inverse()};
    if (!rest.empty()) term.M -= embed(submatrix(c, rest).inverse(), rest);
    t1 += term;
  }
  const QuadForm t2{d * two_pi + log_det(c), c.inverse()};
  QuadForm t3 = whi_form(c, 1.0);
  t3.a += d * two_pi;
  return {model.eval(t1), model.eval(t2), model.eval(t3)};
}

struct ChainSpec {
  char label;
  bool increasing;
};

inline std::optional<ChainSpec> chain_spec(std::string_view id) {
  if (id == "SzaszM") return ChainSpec{'m', false};
  if (id == "SzaszS") return ChainSpec{'s', false};
  if (id == "ToeplitzA") return ChainSpec{'a', false};
  if (id == "WChain") return ChainSpec{'w', true};
  if (id == "UChain") return ChainSpec{'u', false};
  if (id == "ZChain") return ChainSpec{'z', true};
  if (id == "Chain2.9") return ChainSpec{'h', false};
  if (id == "Chain2.13") return ChainSpec{'g', false};
  if (id == "Chain2.16") return ChainSpec{'p', true};
  if (id == "Chain2.19") return ChainSpec{'q', false};
  if (id == "Chain2.22") return ChainSpec{'I', true};
  return std::nullopt;
}

/// Fills the report from ordered terms whose consecutive differences must be >= 0.
inline void fill_ordered(InequalityReport& rep, const std::vector<Quantity>& values,
                         bool increasing, const EvalOptions& opt) {
  for (const Quantity& q : values) rep.chain_values.push_back(q.estimate());
  std::optional<std::size_t> worst;
  std::vector<Quantity> margins;
  for (std::size_t k = 0; k + 1 < values.size(); ++k) {
    margins.push_back(increasing ? values[k + 1] - values[k] : values[k] - values[k + 1]);
    const Estimate e = margins.back().estimate();
    rep.chain_margins.push_back(e);
    rep.chain_verdicts.push_back(opt.verdict(e, Direction::NonNegative));
    if (!worst || e.value < rep.chain_margins[*worst].value) worst = k;
  }
  rep.verdict = combine(rep.chain_verdicts);
  if (!worst) {
    const Estimate only = values.empty() ? Estimate{} : values.front().estimate();
    rep.lhs = rep.rhs = only;
    rep.margin = Estimate{0.0, 0.0, 0, opt.sampling.seed};
    return;
  }
  rep.lhs = rep.chain_values[*worst];
  rep.rhs = rep.chain_values[*worst + 1];
  rep.margin = rep.chain_margins[*worst];
}

inline Scenario prerequisite_scenario(std::string_view id, const Scenario& sc) {
  Scenario out = sc;
  if (id == "Rank1") out.matrices["C2"] = sc.matrix("E");
  return out;
}

inline std::vector<ConditionReport> prerequisites(std::string_view id, const Scenario& sc,
                                                  const EvalOptions& opt, std::string& note) {
  std::vector<ConditionReport> out;
  const InequalityInfo& info = inequality_info(id);
  if (id == "Concavity" && sc.p && sc.has("C1") && *sc.p == sc.matrix("C1").rows()) {
    note = "prerequisites are vacuous for p = d";
    return out;
  }
  const Scenario pre = prerequisite_scenario(id, sc);
  for (const std::string& cid : info.prerequisites) {
    try {
      out.push_back(check(cid, pre, opt));
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& e) {
      ConditionReport skipped;
      skipped.id = cid;
      skipped.verdict = Verdict::Inconclusive;
      out.push_back(skipped);
      note = "prerequisite " + cid + " not evaluated: " + e.what();
    }
  }
  return out;
}

inline std::string format_value(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

inline void append_note(std::string& note, const std::string& text) {
  if (text.empty()) return;
  note += note.empty() ? text : "; " + text;
}

}  // namespace detail

/// Evaluates one inequality and its prerequisite conditions. A failed prerequisite
/// does not stop evaluation; it is reported in the note.
inline InequalityReport verify(std::string_view id, const Scenario& sc, const EvalOptions& opt) {
  using namespace detail;
  inequality_info(id);
  InequalityReport rep;
  rep.id = std::string(id);

  if (const auto cs = chain_spec(id)) {
    const PDMatrix c = sc.pd("C");
    if (!sc.wf.accepts(c.dim())) throw Error("dimension mismatch");
    if (cs->label == 'a') require_toeplitz_chain(c, sc.wf);
    std::optional<double> r;
    if (cs->label == 'g' || cs->label == 's') r = sc.require_r();
    const EntropyModel model(c, opt.prepare(sc.wf, c.dim()), opt.sampling);
    fill_ordered(rep, chain_quantities(cs->label, model, r), cs->increasing, opt);
    rep.method = model.method();
  } else if (id == "Sandwich") {
    const PDMatrix c = sc.pd("C");
    const EntropyModel model(c, opt.prepare(sc.wf, c.dim()), opt.sampling);
    const std::vector<Quantity> terms = sandwich_terms(c, model);
    fill_ordered(rep, terms, true, opt);
    rep.lhs = rep.chain_values.front();
    rep.rhs = rep.chain_values.back();
    rep.method = model.method();
  } else {
    Sides s;
    std::optional<Quantity> statement_rhs;
    if (id == "KyFanW") {
      s = ky_fan_weighted(sc, opt);
    } else if (id == "KyFanStd") {
      s = ky_fan_standard(sc);
    } else if (id == "Thm5.1") {
      s = thm51(sc, opt);
    } else if (id == "Thm5.1alt") {
      s = thm51_alt(sc, opt);
    } else if (id == "Rank1") {
      s = rank_one(sc, opt);
    } else if (id == "WHI") {
      s = whi(sc, opt);
    } else if (id == "WSHI") {
      s = wshi(sc, opt);
    } else if (id == "Identity6.7") {
      s = identity67(sc, opt);
    } else if (id == "Concavity") {
      s = concavity(sc, opt);
    } else if (id == "Superadd") {
      SuperaddResult r = superadd(sc, opt);
      s = std::move(r.sides);
      statement_rhs = std::move(r.statement_rhs);
    }
    const Quantity margin = s.lhs_larger ? s.lhs - s.rhs : s.rhs - s.lhs;
    rep.lhs = s.lhs.estimate();
    rep.rhs = s.rhs.estimate();
    rep.margin = margin.estimate();
    rep.direction = s.direction;
    rep.verdict = opt.verdict(rep.margin, s.direction);
    rep.method = s.method;
    if (statement_rhs) {
      const Estimate alt = (s.lhs - *statement_rhs).estimate();
      if (std::abs(alt.value - rep.margin.value) >
          opt.zcrit * (alt.std_error + rep.margin.std_error) + opt.tolerance) {
        append_note(rep.note, "statement form with psi on every term gives margin " +
                                  format_value(alt.value));
      }
    }
  }

  std::string pre_note;
  rep.prerequisites = prerequisites(id, sc, opt, pre_note);
  const Verdict cond = rep.condition_verdict();
  if (cond == Verdict::Fails) {
    append_note(rep.note, "prerequisite failed; inequality evaluated anyway");
  } else if (cond == Verdict::Inconclusive) {
    append_note(rep.note, "prerequisite inconclusive; inequality evaluated anyway");
  }
  append_note(rep.note, pre_note);
  return rep;
}

struct SweepPoint {
  double grid_value;
  InequalityReport report;

  /// Four-way classification of (condition, inequality).
  std::string classification() const {
    return std::string("condition ") + to_string(report.condition_verdict()) + ", inequality " +
           to_string(report.verdict);
  }
};

/// Inclusive grid "start:stop:step".
inline std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ':')) {
    try {
      std::size_t used = 0;
      parts.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError("grid must be start:stop:step, got '" + text + "'");
    }
  }
  if (parts.size() == 1) return parts;
  if (parts.size() != 3 || !(parts[2] > 0.0) || parts[1] < parts[0]) {
    throw ConfigError("grid must be start:stop:step with step > 0 and stop >= start");
  }
  const auto count = static_cast<std::size_t>(std::floor((parts[1] - parts[0]) / parts[2] + 1e-9)) + 1;
  std::vector<double> grid(count);
  for (std::size_t i = 0; i < count; ++i) grid[i] = parts[0] + static_cast<double>(i) * parts[2];
  return grid;
}

/// Scenario with the named scalar set to value. The tilt axis scales the base
/// exp_tilt direction to length value.
inline Scenario with_axis(const Scenario& base, const std::string& axis, double value) {
  Scenario sc = base;
  if (axis == "lambda") {
    sc.lambda = value;
  } else if (axis == "r") {
    sc.r = value;
  } else if (axis == "t") {
    const auto* e = std::get_if<ExpTilt>(&base.wf.variant());
    if (!e) throw ConfigError("axis 't' requires an exp_tilt weight");
    const double norm = e->t.norm();
    if (!(norm > 0.0)) throw ConfigError("axis 't' requires a nonzero tilt direction");
    sc.wf = WeightFunction(ExpTilt{e->t * (value / norm)}, base.wf.scale());
  } else {
    throw ConfigError("unknown axis '" + axis + "' (expected t, lambda or r)");
  }
  return sc;
}

inline std::vector<SweepPoint> sweep(std::string_view id, const Scenario& base,
                                     const std::string& axis, const std::vector<double>& grid,
                                     const EvalOptions& opt) {
  inequality_info(id);
  for (double g : grid) with_axis(base, axis, g);
  std::vector<std::optional<SweepPoint>> slots(grid.size());
  parallel_for(grid.size(), opt.sampling.threads, [&](std::size_t i) {
    EvalOptions point = opt;
    point.sampling = opt.sampling.with_seed(derive_seed(opt.sampling.seed, i));
    slots[i] = SweepPoint{grid[i], verify(id, with_axis(base, axis, grid[i]), point)};
  });
  std::vector<SweepPoint> out;
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

}  // namespace wde
