#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "wde/linalg.hpp"
#include "wde/random.hpp"

using namespace wde;

namespace {

Matrix wishart(int d, std::uint64_t seed) {
  Matrix g(d, d + 2);
  fill_standard_normal(std::span<double>(g.data(), static_cast<std::size_t>(g.size())), seed);
  return g * g.transpose();
}

Matrix mat(std::initializer_list<std::initializer_list<double>> rows) {
  Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.begin()->size()));
  Eigen::Index i = 0;
  for (const auto& r : rows) {
    Eigen::Index j = 0;
    for (double v : r) m(i, j++) = v;
    ++i;
  }
  return m;
}

}  // namespace

TEST(PDMatrix, RejectsNonSymmetric) {
  EXPECT_THROW(PDMatrix(mat({{1, 2}, {0, 1}})), Error);
}

TEST(PDMatrix, RejectsIndefinite) {
  try {
    PDMatrix(mat({{1, 2}, {2, 1}}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("not positive definite"), std::string::npos);
  }
}

TEST(PDMatrix, RejectsNonFiniteAndEmpty) {
  EXPECT_THROW(PDMatrix(mat({{NAN}})), Error);
  EXPECT_THROW(PDMatrix(Matrix(0, 0)), Error);
}

TEST(PDMatrix, InverseMatchesGaussJordan) {
  const Matrix w = wishart(5, 11);
  const PDMatrix c(w);
  EXPECT_LT(max_abs(c.inverse() - oracle::gauss_jordan_inverse(w)), 1e-10 * max_abs(c.inverse()));
}

TEST(LogDet, Identity) { EXPECT_EQ(log_det(PDMatrix(Matrix::Identity(3, 3))), 0.0); }

TEST(LogDet, Diagonal) {
  EXPECT_NEAR(log_det(PDMatrix(mat({{2, 0}, {0, 3}}))), 1.791759469228055, 1e-12);
}

TEST(LogDet, WishartMatchesCofactor) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Matrix w = wishart(4, seed);
    EXPECT_NEAR(log_det(PDMatrix(w)), std::log(oracle::cofactor_det(w)), 1e-10);
  }
}

TEST(LogDet, SubsetAndEmpty) {
  const PDMatrix c(mat({{1, 0, 0}, {0, 2, 0}, {0, 0, 3}}));
  EXPECT_EQ(log_det(c, IndexSet(3, {})), 0.0);
  EXPECT_NEAR(log_det(c, IndexSet(3, {1, 2})), std::log(6.0), 1e-12);
}

TEST(IndexSet, ValidationAndHelpers) {
  EXPECT_THROW(IndexSet(3, {3}), Error);
  EXPECT_THROW(IndexSet(3, {1, 1}), Error);
  const IndexSet s(5, {0, 2, 4});
  EXPECT_EQ(s.to_string(), "{1,3,5}");
  EXPECT_EQ(s.complement(), IndexSet(5, {1, 3}));
  EXPECT_EQ(IndexSet::from_mask(5, s.mask()), s);
  EXPECT_EQ(IndexSet::range(5, 1, 3), IndexSet(5, {1, 2}));
  EXPECT_TRUE(s.contains(2));
  EXPECT_FALSE(s.contains(1));
}

TEST(Submatrix, Examples) {
  const PDMatrix c(mat({{1, 0, 0}, {0, 2, 0}, {0, 0, 3}}));
  EXPECT_EQ(submatrix(c, IndexSet(3, {1})).matrix(), mat({{2}}));
  const Matrix m = mat({{2, 1}, {1, 2}});
  EXPECT_EQ(submatrix(PDMatrix(m), IndexSet::full(2)).matrix(), m);
  EXPECT_THROW(submatrix(c, IndexSet(3, {})), Error);
}

TEST(Submatrix, MatchesEntrywiseExtraction) {
  const Matrix w = wishart(5, 3);
  const PDMatrix c(w);
  const std::vector<int> idx{0, 2, 4};
  const Matrix sub = submatrix(c, IndexSet(5, idx)).matrix();
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < 3; ++b) EXPECT_EQ(sub(a, b), c.matrix()(idx[a], idx[b]));
  }
}

TEST(ConditionalParams, BlockDiagonal) {
  const Matrix m = mat({{2, 0.5, 0, 0}, {0.5, 1, 0, 0}, {0, 0, 3, 1}, {0, 0, 1, 2}});
  const ConditionalParams cp = conditional_params(PDMatrix(m), 2);
  EXPECT_EQ(max_abs(cp.D), 0.0);
  EXPECT_LT(max_abs(cp.K.matrix() - m.topLeftCorner(2, 2)), 1e-15);
}

TEST(ConditionalParams, TwoByTwo) {
  const ConditionalParams cp = conditional_params(PDMatrix(mat({{2, 1}, {1, 2}})), 1);
  EXPECT_NEAR(cp.D(0, 0), 0.5, 1e-15);
  EXPECT_NEAR(cp.K(0, 0), 1.5, 1e-15);
}

TEST(ConditionalParams, DeterminantFactorization) {
  const Matrix w = wishart(6, 21);
  const PDMatrix c(w);
  const ConditionalParams cp = conditional_params(c, 3);
  const double tail = std::log(oracle::cofactor_det(w.bottomRightCorner(3, 3)));
  EXPECT_NEAR(log_det(c), log_det(cp.K) + tail, 1e-9 * std::abs(log_det(c)) + 1e-12);
}

TEST(ConditionalParams, RejectsBadSplit) {
  const PDMatrix c(Matrix::Identity(3, 3));
  EXPECT_THROW(conditional_params(c, 0), Error);
  EXPECT_THROW(conditional_params(c, 3), Error);
}

TEST(ShermanMorrison, UnitUpdate) {
  Matrix e = Matrix::Zero(2, 2);
  e(0, 0) = 1.0;
  const Matrix inv = sherman_morrison_inverse(PDMatrix(Matrix::Identity(2, 2)), e);
  EXPECT_LT(max_abs(inv - mat({{0.5, 0}, {0, 1}})), 1e-15);
}

TEST(ShermanMorrison, SingularUpdate) {
  try {
    sherman_morrison_inverse(PDMatrix(mat({{1}})), mat({{-1}}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("g = -1"), std::string::npos);
  }
}

TEST(ShermanMorrison, MatchesDenseInverse) {
  const Matrix g = wishart(5, 5);
  Vector v(5);
  fill_standard_normal(std::span<double>(v.data(), 5), 77);
  const Matrix e = v * v.transpose();
  const Matrix expected = oracle::gauss_jordan_inverse(g + e);
  EXPECT_LT(max_abs(sherman_morrison_inverse(PDMatrix(g), e) - expected), 1e-10 * max_abs(expected));
}

TEST(ShermanMorrison, RejectsHigherRank) {
  EXPECT_THROW(sherman_morrison_inverse(PDMatrix(Matrix::Identity(2, 2)), Matrix::Identity(2, 2)),
               Error);
}

TEST(Toeplitz, Examples) {
  const std::vector<double> unit{1, 0, 0};
  EXPECT_EQ(toeplitz(unit, false).matrix(), Matrix::Identity(3, 3));
  const std::vector<double> row{1, 0.5, 0.25};
  EXPECT_EQ(toeplitz(row, false).matrix(), mat({{1, .5, .25}, {.5, 1, .5}, {.25, .5, 1}}));
}

TEST(Toeplitz, CyclicMatchesDistanceTable) {
  const std::vector<double> row{1, 0.4};
  const Matrix m = toeplitz(row, true, 4).matrix();
  // brute-force cyclic distances for d = 4
  const int dist[4][4] = {{0, 1, 2, 1}, {1, 0, 1, 2}, {2, 1, 0, 1}, {1, 2, 1, 0}};
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) EXPECT_EQ(m(i, j), dist[i][j] < 2 ? row[dist[i][j]] : 0.0);
  }
  EXPECT_TRUE(is_toeplitz(m, true));
}

TEST(Toeplitz, RejectsIndefinite) {
  const std::vector<double> row{1, 2};
  EXPECT_THROW(toeplitz(row, false), Error);
}

TEST(RandomPd, Deterministic) {
  EXPECT_EQ(random_pd(1, 0).matrix(), random_pd(1, 0).matrix());
  EXPECT_EQ(random_pd(5, 9).matrix(), random_pd(5, 9).matrix());
}

TEST(RandomPd, SmallestEigenvalueFloor) {
  const Matrix c = random_pd(4, 7).matrix();
  const double top = oracle::power_iteration(c);
  const Matrix shifted = top * Matrix::Identity(4, 4) - c;
  const double smallest = top - oracle::power_iteration(shifted, 20000);
  EXPECT_GE(smallest, 1e-3 - 1e-9);
}

TEST(PsdFactor, SingularInput) {
  Vector v(3);
  v << 1, 2, 3;
  const Matrix s = v * v.transpose();
  const Matrix l = psd_factor(s);
  EXPECT_LT(max_abs(l * l.transpose() - s), 1e-12);
  EXPECT_FALSE(is_nonsingular(s));
  EXPECT_TRUE(is_nonsingular(Matrix::Identity(3, 3)));
}

TEST(Regression, MatchesConditionalParams) {
  const Matrix w = wishart(5, 2);
  const Regression r = regression(w, IndexSet::range(5, 2, 5), IndexSet::range(5, 0, 2));
  const ConditionalParams cp = conditional_params(PDMatrix(w), 2);
  EXPECT_LT(max_abs(r.B - cp.D), 1e-12 * max_abs(cp.D));
  EXPECT_LT(max_abs(r.K - cp.K.matrix()), 1e-12 * max_abs(r.K));
}
