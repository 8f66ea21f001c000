// Copyright 2026 The cheaptalk Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Source priors (exponential, Gaussian) with interval probabilities and
// truncated moments, plus an adaptive-quadrature oracle for the moments.

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "cheaptalk/errors.hpp"
#include "cheaptalk/special_fn.hpp"

namespace cheaptalk {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

class SourceModel {
 public:
  enum class Kind { exponential, gaussian };

  static SourceModel exponential(double rate) {
    if (!(rate > 0.0) || !std::isfinite(rate))
      throw DomainError("exponential rate must be positive and finite");
    return SourceModel(Kind::exponential, rate, 0.0, 1.0);
  }

  static SourceModel gaussian(double mean, double stddev) {
    if (!std::isfinite(mean)) throw DomainError("gaussian mean must be finite");
    if (!(stddev > 0.0) || !std::isfinite(stddev))
      throw DomainError("gaussian standard deviation must be positive and finite");
    return SourceModel(Kind::gaussian, 1.0, mean, stddev);
  }

  Kind kind() const noexcept { return kind_; }
  bool is_exponential() const noexcept { return kind_ == Kind::exponential; }
  bool is_gaussian() const noexcept { return kind_ == Kind::gaussian; }
  double rate() const noexcept { return rate_; }
  double mean() const noexcept { return mean_; }
  double stddev() const noexcept { return stddev_; }

  double support_lo() const noexcept { return is_exponential() ? 0.0 : -kInf; }
  double support_hi() const noexcept { return kInf; }

  double variance() const noexcept {
    return is_exponential() ? 1.0 / (rate_ * rate_) : stddev_ * stddev_;
  }

  double cdf(double x) const {
    if (is_exponential()) return x <= 0.0 ? 0.0 : -std::expm1(-rate_ * x);
    return std_normal_cdf((x - mean_) / stddev_);
  }

  /// Inverse cdf for p in (0, 1).
  double quantile(double p) const {
    if (!(p > 0.0 && p < 1.0)) throw DomainError("quantile requires p in (0, 1)");
    if (is_exponential()) return -std::log1p(-p) / rate_;
    const double z = find_root([p](double t) { return std_normal_cdf(t) - p; },
                               make_bracket([p](double t) { return std_normal_cdf(t) - p; },
                                            -40.0, 40.0),
                               1e-14);
    return mean_ + stddev_ * z;
  }

  friend bool operator==(const SourceModel&, const SourceModel&) = default;

 private:
  SourceModel(Kind kind, double rate, double mean, double stddev)
      : kind_(kind), rate_(rate), mean_(mean), stddev_(stddev) {}

  Kind kind_;
  double rate_;
  double mean_;
  double stddev_;
};

namespace detail {

inline void require_interval(double a, double b) {
  if (std::isnan(a) || std::isnan(b) || !(a < b))
    throw ZeroProbabilityInterval("interval requires a < b");
}

// Exponential interval clipped to the support; throws when it misses it.
inline std::pair<double, double> clip_exponential(double a, double b) {
  require_interval(a, b);
  const double lo = std::max(a, 0.0);
  if (!(lo < b)) throw ZeroProbabilityInterval("interval lies outside [0, inf)");
  return {lo, b};
}

// 1/lambda - l/(e^{lambda l} - 1): offset of the truncated-exponential mean
// from the left edge of a bin of length l.
inline double exp_mean_offset(double rate, double length) {
  if (std::isinf(length)) return 1.0 / rate;
  const double x = rate * length;
  if (x < 1e-3) {
    const double x2 = x * x;
    return length * (0.5 - x / 12.0 + x2 * x / 720.0 - x2 * x2 * x / 30240.0);
  }
  return 1.0 / rate - length / std::expm1(x);
}

// E[Z | alpha < Z < beta] for standard normal Z. Same-sign intervals go
// through the scaled tail ratio so nothing underflows arbitrarily deep in a tail.
inline double std_truncated_mean(double alpha, double beta) {
  if (alpha <= -kInf && beta >= kInf) return 0.0;
  if (alpha >= 0.0) {
    if (std::isinf(beta)) return 1.0 / upper_tail_ratio(alpha);
    const double r = std::exp(-0.5 * (beta - alpha) * (beta + alpha));
    const double num = -std::expm1(-0.5 * (beta - alpha) * (beta + alpha));
    const double den = upper_tail_ratio(alpha) - r * upper_tail_ratio(beta);
    if (!(den > 0.0)) throw ZeroProbabilityInterval("gaussian interval mass underflows");
    return num / den;
  }
  if (beta <= 0.0) return -std_truncated_mean(-beta, -alpha);
  const double pa = std::isinf(alpha) ? 0.0 : std_normal_pdf(alpha);
  const double pb = std::isinf(beta) ? 0.0 : std_normal_pdf(beta);
  const double mass = std_normal_cdf(beta) - std_normal_cdf(alpha);
  if (!(mass > 0.0)) throw ZeroProbabilityInterval("gaussian interval mass underflows");
  return (pa - pb) / mass;
}

inline double std_interval_prob(double alpha, double beta) {
  if (alpha >= 0.0) return std_normal_sf(alpha) - std_normal_sf(beta);
  if (beta <= 0.0) return std_normal_cdf(beta) - std_normal_cdf(alpha);
  return 1.0 - std_normal_sf(beta) - std_normal_cdf(alpha);
}

inline double std_log_interval_prob(double alpha, double beta) {
  if (beta <= 0.0) return std_log_interval_prob(-beta, -alpha);
  if (alpha >= 0.0) {
    const double la = log_std_normal_sf(alpha);
    if (std::isinf(beta)) return la;
    const double lb = log_std_normal_sf(beta);
    // log(Q(a) - Q(b)) = log Q(a) + log(1 - Q(b)/Q(a))
    return la + std::log(-std::expm1(lb - la));
  }
  return std::log(std_interval_prob(alpha, beta));
}

// Half-infinite quadrature ranges are cut where the neglected weight is below 1e-30.
inline constexpr double kGaussQuadratureSpan = 12.0;
inline constexpr double kExpQuadratureSpan = 75.0;

struct QuadratureResult {
  double value;
  double error;
};

// Boost reports sub-interval error estimates on the unit-interval scale, so
// the spread between two Kronrod orders serves as the error instead. The
// interval is mapped onto [-1, 1] first; otherwise short intervals never
// meet the stopping test and recurse to full depth.
template <class F>
QuadratureResult adaptive_integral(F&& f, double a, double b) {
  using boost::math::quadrature::gauss_kronrod;
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  auto unit = [&](double t) { return half * f(mid + half * t); };
  const double coarse = gauss_kronrod<double, 31>::integrate(unit, -1.0, 1.0, 15, 1e-13);
  const double fine = gauss_kronrod<double, 61>::integrate(unit, -1.0, 1.0, 15, 1e-13);
  return {fine, std::abs(fine - coarse)};
}

}  // namespace detail

/// Pr(a < M < b).
inline double interval_prob(const SourceModel& src, double a, double b) {
  if (!(a < b)) return 0.0;
  if (src.is_exponential()) {
    const double lo = std::max(a, 0.0);
    if (!(lo < b)) return 0.0;
    const double head = std::exp(-src.rate() * lo);
    if (std::isinf(b)) return head;
    return head * -std::expm1(-src.rate() * (b - lo));
  }
  return detail::std_interval_prob((a - src.mean()) / src.stddev(),
                                   (b - src.mean()) / src.stddev());
}

/// log Pr(a < M < b); -inf only for intervals that miss the support.
inline double log_interval_prob(const SourceModel& src, double a, double b) {
  if (!(a < b)) return -kInf;
  if (src.is_exponential()) {
    const double lo = std::max(a, 0.0);
    if (!(lo < b)) return -kInf;
    const double head = -src.rate() * lo;
    if (std::isinf(b)) return head;
    return head + std::log(-std::expm1(-src.rate() * (b - lo)));
  }
  return detail::std_log_interval_prob((a - src.mean()) / src.stddev(),
                                       (b - src.mean()) / src.stddev());
}

/// E[M | a < M < b]. Either end may be infinite.
inline double truncated_mean(const SourceModel& src, double a, double b) {
  if (src.is_exponential()) {
    const auto [lo, hi] = detail::clip_exponential(a, b);
    return lo + detail::exp_mean_offset(src.rate(), hi - lo);
  }
  detail::require_interval(a, b);
  const double s = src.stddev();
  const double m = src.mean() + s * detail::std_truncated_mean((a - src.mean()) / s,
                                                               (b - src.mean()) / s);
  if (!std::isfinite(m)) throw ZeroProbabilityInterval("gaussian interval mass underflows");
  return m;
}

namespace detail {

// Propagated error of num / den against an absolute budget (relative
// beyond unit magnitude).
inline void check_budget(double value, const QuadratureResult& num, const QuadratureResult& den) {
  constexpr double kBudget = 1e-11;
  const double err = (num.error + std::abs(value) * den.error) / den.value;
  if (!std::isfinite(value) || !(den.value > 0.0) || !(err <= kBudget * std::max(1.0, std::abs(value))))
    throw NonConvergence(15, "quadrature_moment did not meet its error budget");
}

}  // namespace detail

/// Adaptive Gauss-Kronrod estimate of E[M^power | a < M < b], power in {1, 2}.
/// Independent of the closed forms; meant for verification.
inline double quadrature_moment(const SourceModel& src, double a, double b, int power) {
  if (power != 1 && power != 2) throw DomainError("quadrature_moment: power must be 1 or 2");

  if (src.is_exponential()) {
    const auto [lo, hi0] = detail::clip_exponential(a, b);
    const double rate = src.rate();
    const double hi = std::isinf(hi0) ? lo + detail::kExpQuadratureSpan / rate : hi0;
    // Density relative to its value at lo keeps the weights O(1).
    auto w = [=](double m) { return std::exp(-rate * (m - lo)); };
    auto num = detail::adaptive_integral(
        [&](double m) { return (power == 1 ? m : m * m) * w(m); }, lo, hi);
    auto den = detail::adaptive_integral(w, lo, hi);
    const double value = num.value / den.value;
    check_budget(value, num, den);
    return value;
  }

  detail::require_interval(a, b);
  const double mu = src.mean(), s = src.stddev();
  double alpha = (a - mu) / s;
  double beta = (b - mu) / s;
  // Peak of the density inside [alpha, beta].
  const double z0 = std::clamp(0.0, alpha, beta);
  if (std::isinf(alpha)) alpha = z0 - detail::kGaussQuadratureSpan;
  if (std::isinf(beta)) beta = z0 + detail::kGaussQuadratureSpan;
  auto w = [=](double z) { return std::exp(-0.5 * (z - z0) * (z + z0)); };
  auto den = detail::adaptive_integral(w, alpha, beta);
  auto m1 = detail::adaptive_integral([&](double z) { return z * w(z); }, alpha, beta);
  const double ez = m1.value / den.value;
  check_budget(mu + s * ez, {s * m1.value, s * m1.error}, den);
  if (power == 1) return mu + s * ez;
  auto m2 = detail::adaptive_integral([&](double z) { return z * z * w(z); }, alpha, beta);
  const double ez2 = m2.value / den.value;
  const double value = mu * mu + 2.0 * mu * s * ez + s * s * ez2;
  check_budget(value, {s * s * m2.value, s * s * m2.error}, den);
  return value;
}

/// Var(M | a < M < b). Exponential bins use the closed form, which depends
/// on the bin length only; Gaussian bins are integrated numerically about the
/// closed-form mean.
inline double truncated_variance(const SourceModel& src, double a, double b) {
  if (src.is_exponential()) {
    const auto [lo, hi] = detail::clip_exponential(a, b);
    const double rate = src.rate();
    const double length = hi - lo;
    if (std::isinf(length)) return 1.0 / (rate * rate);
    const double x = rate * length;
    if (x < 1e-2) {
      const double x2 = x * x;
      return length * length *
             (1.0 / 12.0 - x2 / 240.0 + x2 * x2 / 6048.0 - x2 * x2 * x2 / 172800.0);
    }
    // e^x + e^-x - 2 == (2 sinh(x/2))^2
    const double ratio = x / (2.0 * std::sinh(0.5 * x));
    return (1.0 - ratio * ratio) / (rate * rate);
  }

  detail::require_interval(a, b);
  const double mu = src.mean(), s = src.stddev();
  double alpha = (a - mu) / s;
  double beta = (b - mu) / s;
  const double zbar = detail::std_truncated_mean(alpha, beta);
  const double z0 = std::clamp(0.0, alpha, beta);
  if (std::isinf(alpha)) alpha = z0 - detail::kGaussQuadratureSpan;
  if (std::isinf(beta)) beta = z0 + detail::kGaussQuadratureSpan;
  // Integrate over t = z - zbar so the squared offset carries no roundoff.
  auto w = [=](double t) {
    const double z = t + zbar;
    return std::exp(-0.5 * (z - z0) * (z + z0));
  };
  auto den = detail::adaptive_integral(w, alpha - zbar, beta - zbar);
  auto num = detail::adaptive_integral([&](double t) { return t * t * w(t); }, alpha - zbar,
                                       beta - zbar);
  const double v = s * s * num.value / den.value;
  if (!std::isfinite(v)) throw ZeroProbabilityInterval("gaussian interval mass underflows");
  return std::clamp(v, 0.0, s * s);
}

}  // namespace cheaptalk
