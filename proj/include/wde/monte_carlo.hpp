#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "wde/error.hpp"
#include "wde/linalg.hpp"
#include "wde/random.hpp"

namespace wde {

struct SampleSpec {
  std::size_t n_samples = 100000;
  std::uint64_t seed = 0;
  std::size_t chunk_size = 4096;
  unsigned threads = 0;  ///< 0 picks hardware concurrency; results do not depend on it

  void validate() const {
    if (n_samples < 1) throw Error("n_samples must be at least 1");
    if (chunk_size < 1) throw Error("chunk_size must be at least 1");
  }
  SampleSpec with_seed(std::uint64_t s) const {
    SampleSpec out = *this;
    out.seed = s;
    return out;
  }
};

struct Estimate {
  double value = 0.0;
  double std_error = 0.0;
  std::size_t n = 0;  ///< 0 for exact values
  std::uint64_t seed = 0;
};

enum class Method { ClosedForm, MonteCarlo };

inline const char* to_string(Method m) {
  return m == Method::ClosedForm ? "closed_form" : "monte_carlo";
}

/// Runs fn(i) for i in [0, count) across worker threads.
inline void parallel_for(std::size_t count, unsigned threads,
                         const std::function<void(std::size_t)>& fn) {
  unsigned workers = threads ? threads : std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, count));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count && !failed; i = next++) {
        try {
          fn(i);
        } catch (...) {
          if (!failed.exchange(true)) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

/// rows x n standard normals; column block i is drawn from derive_seed(seed, i).
inline Matrix standard_normals(int rows, const SampleSpec& spec) {
  spec.validate();
  const std::size_t n = spec.n_samples;
  Matrix g(rows, static_cast<Eigen::Index>(n));
  if (rows == 0) return g;
  const std::size_t chunks = (n + spec.chunk_size - 1) / spec.chunk_size;
  parallel_for(chunks, spec.threads, [&](std::size_t i) {
    const std::size_t first = i * spec.chunk_size;
    const std::size_t count = std::min(spec.chunk_size, n - first);
    double* base = g.data() + first * static_cast<std::size_t>(rows);
    fill_standard_normal(std::span<double>(base, count * static_cast<std::size_t>(rows)),
                         derive_seed(spec.seed, i));
  });
  return g;
}

/// Draws from N(0, C) as columns L g.
inline Matrix sample_gaussian(const PDMatrix& c, const SampleSpec& spec) {
  return c.chol().triangularView<Eigen::Lower>() * standard_normals(c.dim(), spec);
}

inline Estimate mean_estimate(std::span<const double> values, std::uint64_t seed) {
  const std::size_t n = values.size();
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double sd = n > 1 ? std::sqrt(ss / static_cast<double>(n - 1)) : 0.0;
  return {mean, sd / std::sqrt(static_cast<double>(n)), n, seed};
}

inline Estimate expect(const std::function<double(const Vector&)>& g, const PDMatrix& c,
                       const SampleSpec& spec) {
  const Matrix x = sample_gaussian(c, spec);
  std::vector<double> values(spec.n_samples);
  Vector col(c.dim());
  for (std::size_t i = 0; i < spec.n_samples; ++i) {
    col = x.col(static_cast<Eigen::Index>(i));
    values[i] = g(col);
    if (!std::isfinite(values[i])) {
      throw Error("integrand not finite at sample " + std::to_string(i));
    }
  }
  return mean_estimate(values, spec.seed);
}

enum class Direction { NonNegative, NonPositive, Zero };
enum class Verdict { Holds, Fails, Inconclusive };

inline const char* to_string(Direction d) {
  switch (d) {
    case Direction::NonNegative: return ">=0";
    case Direction::NonPositive: return "<=0";
    case Direction::Zero: return "=0";
  }
  return "?";
}

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Holds: return "Holds";
    case Verdict::Fails: return "Fails";
    case Verdict::Inconclusive: return "Inconclusive";
  }
  return "?";
}

/// `tol` is an absolute band added to z_crit * stderr (rounding on exact paths).
inline Verdict signed_verdict(const Estimate& e, Direction dir, double z_crit = 4.0,
                              double tol = 0.0) {
  const double band = z_crit * e.std_error + tol;
  switch (dir) {
    case Direction::NonNegative:
      if (e.value - z_crit * e.std_error >= -tol) return Verdict::Holds;
      if (e.value < -band) return Verdict::Fails;
      return Verdict::Inconclusive;
    case Direction::NonPositive:
      if (e.value + z_crit * e.std_error <= tol) return Verdict::Holds;
      if (e.value > band) return Verdict::Fails;
      return Verdict::Inconclusive;
    case Direction::Zero:
      return std::abs(e.value) <= band ? Verdict::Holds : Verdict::Fails;
  }
  return Verdict::Inconclusive;
}

/// Holds iff all hold; Fails if any fails; otherwise Inconclusive.
inline Verdict combine(std::span<const Verdict> verdicts) {
  bool inconclusive = false;
  for (Verdict v : verdicts) {
    if (v == Verdict::Fails) return Verdict::Fails;
    if (v == Verdict::Inconclusive) inconclusive = true;
  }
  return inconclusive ? Verdict::Inconclusive : Verdict::Holds;
}

/// Scalar that is either exact or a sample mean, kept per sample so that linear
/// combinations of estimates built on shared draws carry the exact joint stderr.
class Quantity {
 public:
  Quantity() = default;
  explicit Quantity(double exact) : constant_(exact) {}
  Quantity(std::vector<double> samples, std::uint64_t seed)
      : samples_(std::move(samples)), seed_(seed) {}

  bool exact() const { return samples_.empty(); }
  std::size_t samples() const { return samples_.size(); }
  std::uint64_t seed() const { return seed_; }

  Estimate estimate() const {
    if (exact()) return {constant_, 0.0, 0, seed_};
    Estimate e = mean_estimate(samples_, seed_);
    e.value += constant_;
    return e;
  }
  double value() const { return estimate().value; }
  double std_error() const { return estimate().std_error; }

  Quantity& operator+=(const Quantity& o) { return axpy(1.0, o); }
  Quantity& operator-=(const Quantity& o) { return axpy(-1.0, o); }
  Quantity& operator*=(double s) {
    constant_ *= s;
    for (double& v : samples_) v *= s;
    return *this;
  }
  friend Quantity operator+(Quantity a, const Quantity& b) { return a += b; }
  friend Quantity operator-(Quantity a, const Quantity& b) { return a -= b; }
  friend Quantity operator*(Quantity a, double s) { return a *= s; }
  friend Quantity operator*(double s, Quantity a) { return a *= s; }
  friend Quantity operator+(Quantity a, double b) { return a += Quantity(b); }
  friend Quantity operator-(Quantity a) { return a *= -1.0; }

  /// f applied to the estimate, linearized per sample around the mean (delta method).
  Quantity map(const std::function<double(double)>& f,
               const std::function<double(double)>& df) const {
    const double v = value();
    Quantity out(f(v));
    if (!exact()) {
      const double slope = df(v);
      const double mean_samples = v - constant_;
      std::vector<double> s(samples_.size());
      for (std::size_t i = 0; i < s.size(); ++i) s[i] = slope * (samples_[i] - mean_samples);
      out.samples_ = std::move(s);
      out.seed_ = seed_;
    }
    return out;
  }

 private:
  Quantity& axpy(double a, const Quantity& o) {
    constant_ += a * o.constant_;
    if (o.exact()) return *this;
    if (exact()) {
      samples_.assign(o.samples_.size(), 0.0);
      seed_ = o.seed_;
    } else if (samples_.size() != o.samples_.size()) {
      throw Error("cannot combine estimates with different sample counts");
    }
    for (std::size_t i = 0; i < samples_.size(); ++i) samples_[i] += a * o.samples_[i];
    return *this;
  }

  double constant_ = 0.0;
  std::vector<double> samples_;
  std::uint64_t seed_ = 0;
};

}  // namespace wde
