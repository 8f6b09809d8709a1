#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "oracles.hpp"
#include "wde/inequalities.hpp"

using namespace wde;

namespace {

Matrix scalar(double v) { return Matrix::Constant(1, 1, v); }

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

EvalOptions options(std::uint64_t seed = 0) {
  EvalOptions opt;
  opt.sampling = SampleSpec{100000, seed, 4096, 0};
  return opt;
}

Scenario kyfan(double lambda, const WeightFunction& wf = WeightFunction()) {
  Scenario sc;
  sc.matrices["C1"] = scalar(1.0);
  sc.matrices["C2"] = scalar(4.0);
  sc.lambda = lambda;
  sc.wf = wf;
  return sc;
}

Scenario single(const Matrix& c, const WeightFunction& wf = WeightFunction()) {
  Scenario sc;
  sc.matrices["C"] = c;
  sc.wf = wf;
  return sc;
}

Vector random_tilt(int d, std::uint64_t seed, double scale) {
  Vector t(d);
  fill_standard_normal(std::span<double>(t.data(), static_cast<std::size_t>(d)), seed);
  return t * scale;
}

}  // namespace

TEST(Registry, Ids) {
  std::set<std::string> ids;
  for (const InequalityInfo& info : list_inequalities()) ids.insert(info.id);
  EXPECT_EQ(ids.size(), 22u);
  EXPECT_TRUE(ids.count("Identity6.7"));
  EXPECT_TRUE(ids.count("Chain2.22"));
  EXPECT_THROW(verify("Nope", kyfan(0.5), options()), ConfigError);
}

TEST(KyFan, StandardScalar) {
  const InequalityReport r = verify("KyFanStd", kyfan(0.5), options());
  EXPECT_NEAR(r.margin.value, std::log(2.5) - 0.5 * std::log(4.0), 1e-14);
  EXPECT_NEAR(r.margin.value, 0.22314, 1e-5);
  EXPECT_EQ(r.verdict, Verdict::Holds);
}

TEST(KyFan, WeightedReducesAtConstantWeight) {
  Scenario sc;
  sc.matrices["C1"] = random_pd(4, 1).matrix();
  sc.matrices["C2"] = random_pd(4, 2).matrix();
  for (double lambda : {0.0, 0.25, 0.5, 1.0}) {
    sc.lambda = lambda;
    const double w = verify("KyFanW", sc, options()).margin.value;
    const double s = verify("KyFanStd", sc, options()).margin.value;
    EXPECT_NEAR(w, s, 1e-9);
    if (lambda == 0.0 || lambda == 1.0) {
      EXPECT_NEAR(w, 0.0, 1e-9);
    }
  }
}

TEST(KyFan, WeightedScalarTiltQuadrature) {
  const double t = 0.3;
  const InequalityReport r = verify("KyFanW", kyfan(0.5, WeightFunction::exp_tilt(vec({t}))), options());
  // 2 sigma(c) = E phi (ln 2 pi c + x^2 / c)
  auto two_sigma = [t](double c) {
    return oracle::gaussian_expectation(
        [&](const Vector& x) { return std::exp(t * x(0)) * (std::log(kTwoPi * c) + x(0) * x(0) / c); },
        scalar(c));
  };
  EXPECT_NEAR(r.margin.value, two_sigma(2.5) - 0.5 * two_sigma(1.0) - 0.5 * two_sigma(4.0), 1e-10);
  EXPECT_EQ(r.verdict, Verdict::Holds);
  EXPECT_EQ(r.condition_verdict(), Verdict::Fails);
  EXPECT_NE(r.note.find("prerequisite failed"), std::string::npos);
}

TEST(Whi, DiagonalIsEquality) {
  const Matrix c = vec({1.0, 2.0, 0.5}).asDiagonal();
  const InequalityReport r = verify("WHI", single(c, WeightFunction::exp_tilt(vec({0.3, -0.4, 0.2}))), options());
  EXPECT_EQ(r.direction, Direction::Zero);
  EXPECT_NEAR(r.margin.value, 0.0, 1e-12);
  EXPECT_EQ(r.verdict, Verdict::Holds);
}

TEST(Whi, OffDiagonalStrict) {
  Matrix c(2, 2);
  c << 1, 0.5, 0.5, 1;
  const InequalityReport r = verify("WHI", single(c), options());
  EXPECT_NEAR(r.margin.value, -std::log(0.75), 1e-12);
  EXPECT_EQ(r.verdict, Verdict::Holds);
}

TEST(Wshi, ConstantWeightIsClassical) {
  const PDMatrix c = random_pd(4, 3);
  Scenario sc = single(c.matrix());
  sc.p = 2;
  const InequalityReport r = verify("WSHI", sc, options());
  // det C det C(tail) <= det C({1} u tail) det C({2} u tail), each entropy carries 2 pi e
  const IndexSet tail = IndexSet::range(4, 2, 4);
  const double classical = log_det(c, IndexSet(4, {0, 2, 3})) + log_det(c, IndexSet(4, {1, 2, 3})) -
                           log_det(c) - log_det(c, tail);
  EXPECT_NEAR(r.margin.value, classical, 1e-10);
  EXPECT_EQ(r.verdict, Verdict::Holds);
}

TEST(Identity67, ZeroOnBothPaths) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const int d = 2 + static_cast<int>(seed % 4);
    const Scenario sc = single(random_pd(d, seed).matrix(),
                               WeightFunction::exp_tilt(random_tilt(d, seed + 100, 0.2)));
    const InequalityReport exact = verify("Identity6.7", sc, options(seed));
    EXPECT_NEAR(exact.margin.value, 0.0, 1e-9);
    EXPECT_EQ(exact.verdict, Verdict::Holds);
    EvalOptions mc = options(seed);
    mc.force_monte_carlo = true;
    const InequalityReport sampled = verify("Identity6.7", sc, mc);
    EXPECT_LE(std::abs(sampled.margin.value), 4 * sampled.margin.std_error + 1e-12);
  }
  EXPECT_NEAR(verify("Identity6.7", single(scalar(2.0)), options()).margin.value, 0.0, 1e-12);
}

TEST(Thm51, RankOneAndAlternativeMatch) {
  const Vector v = vec({0.6, -0.3, 0.8});
  Scenario sc;
  sc.matrices["C1"] = random_pd(3, 4).matrix();
  sc.matrices["C2"] = v * v.transpose();
  sc.matrices["E"] = sc.matrices["C2"];
  sc.wf = WeightFunction::exp_tilt(vec({0.1, 0.2, -0.1, 0.3, 0.0, -0.2}));
  const InequalityReport base = verify("Thm5.1", sc, options());
  EXPECT_NEAR(verify("Rank1", sc, options()).margin.value, base.margin.value, 1e-9);
  EXPECT_NEAR(verify("Thm5.1alt", sc, options()).margin.value, base.margin.value, 1e-9);

  EvalOptions mc = options(5);
  mc.force_monte_carlo = true;
  const InequalityReport alt = verify("Thm5.1alt", sc, mc);
  EXPECT_EQ(alt.method, Method::MonteCarlo);
  EXPECT_NEAR(alt.margin.value, base.margin.value, 4 * alt.margin.std_error);
}

TEST(Thm51, RankOneRejectsIndefinite) {
  Scenario sc;
  sc.matrices["C1"] = Matrix::Identity(2, 2);
  sc.matrices["E"] = -Matrix(vec({1.0, 0.0}).asDiagonal());
  EXPECT_THROW(verify("Rank1", sc, options()), ConfigError);
}

TEST(Chains, ConstantWeightHolds) {
  Scenario sc = single(random_pd(5, 17).matrix());
  sc.r = 0.5;
  for (const char* id : {"SzaszM", "SzaszS", "WChain", "UChain", "ZChain", "Chain2.9", "Chain2.13",
                         "Chain2.16", "Chain2.19", "Chain2.22", "Sandwich"}) {
    const InequalityReport r = verify(id, sc, options());
    EXPECT_EQ(r.verdict, Verdict::Holds) << id;
    EXPECT_GE(r.margin.value, -1e-9) << id;
  }
}

TEST(Chains, ToeplitzA) {
  const std::vector<double> row{1.0, 0.4, 0.1};
  const Scenario sc = single(toeplitz(row, true, 6).matrix());
  const InequalityReport r = verify("ToeplitzA", sc, options());
  EXPECT_EQ(r.chain_values.size(), 6u);
  EXPECT_EQ(r.verdict, Verdict::Holds);
  EXPECT_THROW(verify("ToeplitzA", single(random_pd(3, 1).matrix()), options()), Error);
}

TEST(Chains, WorstPairReported) {
  const InequalityReport r = verify("Chain2.9", single(random_pd(4, 2).matrix()), options());
  ASSERT_EQ(r.chain_margins.size(), 3u);
  double worst = r.chain_margins[0].value;
  for (const Estimate& e : r.chain_margins) worst = std::min(worst, e.value);
  EXPECT_EQ(r.margin.value, worst);
}

TEST(Concavity, ConstantWeight) {
  Scenario sc;
  sc.matrices["C1"] = random_pd(3, 1).matrix();
  sc.matrices["C2"] = random_pd(3, 2).matrix();
  sc.lambda = 0.4;
  sc.p = 1;
  const InequalityReport r = verify("Concavity", sc, options());
  EXPECT_EQ(r.verdict, Verdict::Holds);
  EXPECT_EQ(r.prerequisites.size(), 2u);
  sc.p = 3;
  const InequalityReport full = verify("Concavity", sc, options());
  EXPECT_TRUE(full.prerequisites.empty());
  EXPECT_NE(full.note.find("vacuous"), std::string::npos);
}

TEST(Superadd, CounterexampleAtConstantWeight) {
  Scenario sc;
  sc.matrices["A"] = Matrix::Identity(2, 2);
  sc.matrices["B"] = Matrix::Identity(2, 2);
  const InequalityReport r = verify("Superadd", sc, options());
  const double expected = 0.5 * std::log(2.0) - 0.5 * std::log(kTwoPi * std::exp(1.0));
  EXPECT_NEAR(r.margin.value, expected, 1e-12);
  EXPECT_NEAR(r.margin.value, -1.07, 5e-3);
  EXPECT_EQ(r.verdict, Verdict::Fails);
  EXPECT_EQ(r.condition_verdict(), Verdict::Holds);
}

TEST(Prerequisites, OversizedDimensionIsInconclusive) {
  const InequalityReport r = verify("Chain2.9", single(Matrix::Identity(9, 9)), options());
  EXPECT_EQ(r.condition_verdict(), Verdict::Inconclusive);
  EXPECT_NE(r.note.find("prerequisite C2.8 not evaluated"), std::string::npos);
}

TEST(Sweep, GridParsing) {
  EXPECT_EQ(parse_grid("0.5"), std::vector<double>{0.5});
  EXPECT_EQ(parse_grid("0:2:0.1").size(), 21u);
  EXPECT_EQ(parse_grid("0:1:0.25"), (std::vector<double>{0, 0.25, 0.5, 0.75, 1.0}));
  EXPECT_THROW(parse_grid("1:0:0.1"), ConfigError);
  EXPECT_THROW(parse_grid("0:1"), ConfigError);
  EXPECT_THROW(parse_grid("a:b:c"), ConfigError);
}

TEST(Sweep, TiltAxisClassifies) {
  const Scenario base = kyfan(0.5, WeightFunction::exp_tilt(vec({1.0})));
  const auto points = sweep("KyFanW", base, "t", parse_grid("0:1:0.5"), options());
  ASSERT_EQ(points.size(), 3u);
  EXPECT_EQ(points[0].classification(), "condition Holds, inequality Holds");
  EXPECT_NEAR(points[0].report.margin.value, std::log(2.5) - 0.5 * std::log(4.0), 1e-12);
  EXPECT_EQ(points[2].report.condition_verdict(), Verdict::Fails);
  EXPECT_THROW(sweep("KyFanW", kyfan(0.5), "t", {0.5}, options()), ConfigError);
  EXPECT_THROW(sweep("KyFanW", base, "q", {0.5}, options()), ConfigError);
}

TEST(Sweep, LambdaAxis) {
  const auto points = sweep("KyFanStd", kyfan(0.5), "lambda", parse_grid("0:1:0.5"), options());
  EXPECT_NEAR(points[0].report.margin.value, 0.0, 1e-14);
  EXPECT_NEAR(points[1].report.margin.value, 0.22314355131420976, 1e-12);
  EXPECT_NEAR(points[2].report.margin.value, 0.0, 1e-14);
}

TEST(Stability, SampledVerdictsAgree) {
  Scenario sc;
  sc.matrices["C1"] = random_pd(2, 3).matrix();
  sc.matrices["C2"] = random_pd(2, 4).matrix();
  sc.lambda = 0.5;
  sc.wf = WeightFunction::exp_tilt(vec({0.2, -0.1}));
  const InequalityReport exact = verify("KyFanW", sc, options());
  int agree = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    EvalOptions mc = options(seed);
    mc.force_monte_carlo = true;
    mc.sampling.n_samples = 20000;
    const InequalityReport r = verify("KyFanW", sc, mc);
    agree += std::abs(r.margin.value - exact.margin.value) <= 4 * r.margin.std_error;
  }
  EXPECT_GE(agree, 19);
}
