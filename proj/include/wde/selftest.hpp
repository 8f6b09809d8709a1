#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "wde/gaussian_model.hpp"
#include "wde/linalg.hpp"
#include "wde/moments.hpp"
#include "wde/monte_carlo.hpp"
#include "wde/random.hpp"
#include "wde/weights.hpp"

namespace wde {

struct ReductionCase {
  int d;
  double value;
  double expected;
  bool passed;
};

struct MomentCase {
  int d;
  double worst_z;  ///< largest |MC - exact| / stderr over alpha and Phi entries
  bool agreed;
};

struct SelftestReport {
  std::vector<ReductionCase> reductions;
  std::vector<MomentCase> moments;
  int reductions_passed = 0;
  int moments_agreed = 0;
  int moments_required = 95;
  bool passed = false;
};

struct SelftestOptions {
  SampleSpec sampling;
  double zcrit = 4.0;
  double tolerance = 1e-9;
  int reduction_runs = 100;
  int moment_runs = 100;
  int moment_max_dim = 6;
};

/// phi = 1 entropies against 1/2 ln[(2 pi e)^d det C] with det from LU.
inline ReductionCase reduction_case(int d, std::uint64_t seed, const SelftestOptions& opt) {
  const PDMatrix c = random_pd(d, seed);
  const double det = c.matrix().partialPivLu().determinant();
  const double expected = 0.5 * (d * std::log(kTwoPi * std::exp(1.0)) + std::log(det));
  const double value = gaussian_we(c, WeightFunction::constant(1.0), opt.sampling).value;
  return {d, value, expected, std::abs(value - expected) <= opt.tolerance};
}

/// Sampled alpha and Phi for a random tilt against the exact exponential-tilt moments.
inline MomentCase moment_case(int d, std::uint64_t seed, const SelftestOptions& opt) {
  const PDMatrix c = random_pd(d, derive_seed(seed, 1));
  Vector t(d);
  fill_standard_normal(std::span<double>(t.data(), static_cast<std::size_t>(d)), derive_seed(seed, 2));
  t *= 0.3 / std::sqrt(static_cast<double>(d));
  const WeightFunction phi = WeightFunction::exp_tilt(t);

  const Vector ct = c.matrix() * t;
  const double alpha = std::exp(0.5 * t.dot(ct));
  const Matrix exact_phi = alpha * (c.matrix() + ct * ct.transpose());

  const MomentSource src =
      MomentSource::plain(c, phi.opaque(d), opt.sampling.with_seed(derive_seed(seed, 3)));
  const WeightedMoments m = moments_of(src, d);
  auto z = [](const Estimate& e, double exact) {
    const double diff = std::abs(e.value - exact);
    return e.std_error > 0.0 ? diff / e.std_error : (diff == 0.0 ? 0.0 : INFINITY);
  };
  double worst = z(m.alpha, alpha);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      worst = std::max(worst, z(m.phi_matrix[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)],
                                exact_phi(i, j)));
    }
  }
  return {d, worst, worst <= opt.zcrit};
}

inline SelftestReport selftest(const SelftestOptions& opt) {
  SelftestReport out;
  const std::uint64_t base = opt.sampling.seed;
  for (int i = 0; i < opt.reduction_runs; ++i) {
    out.reductions.push_back(reduction_case(1 + i % 8, derive_seed(base, static_cast<std::uint64_t>(i)), opt));
    out.reductions_passed += out.reductions.back().passed;
  }
  const std::uint64_t moment_base = derive_seed(base, 0x6d6f6d656e7473ULL);
  for (int i = 0; i < opt.moment_runs; ++i) {
    out.moments.push_back(moment_case(1 + i % opt.moment_max_dim,
                                      derive_seed(moment_base, static_cast<std::uint64_t>(i)), opt));
    out.moments_agreed += out.moments.back().agreed;
  }
  out.moments_required = (95 * opt.moment_runs + 99) / 100;
  out.passed = out.reductions_passed == opt.reduction_runs && out.moments_agreed >= out.moments_required;
  return out;
}

}  // namespace wde
