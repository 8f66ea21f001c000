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

// Equilibria for an exponential source: bin-count bounds, bias thresholds,
// the two-bin closed form, the backward recursion for N bins, the
// equal-length infinite ladder and the cost ladder between them.

#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <vector>

#include "cheaptalk/equilibrium.hpp"
#include "cheaptalk/errors.hpp"
#include "cheaptalk/sources.hpp"
#include "cheaptalk/special_fn.hpp"

namespace cheaptalk::exponential {

namespace detail {

inline void require_rate(double rate) {
  if (!(rate > 0.0) || !std::isfinite(rate)) throw DomainError("rate must be positive and finite");
}

inline void require_positive_bias(double b) {
  if (!(b > 0.0) || !std::isfinite(b)) throw DomainError("requires a positive finite bias");
}

// expm1(x) - x
inline double expm1_minus_x(double x) {
  if (std::abs(x) > 0.5) return std::expm1(x) - x;
  double term = 0.5 * x * x;
  double sum = term;
  for (int n = 3; n < 30; ++n) {
    term *= x / n;
    sum += term;
    if (std::abs(term) <= 1e-17 * std::abs(sum)) break;
  }
  return sum;
}

// sinh(x) - x
inline double sinh_minus_x(double x) {
  if (std::abs(x) > 0.5) return std::sinh(x) - x;
  const double x2 = x * x;
  double term = x * x2 / 6.0;
  double sum = term;
  for (int n = 4; n < 40; n += 2) {
    term *= x2 / (n * (n + 1));
    sum += term;
    if (std::abs(term) <= 1e-17 * std::abs(sum)) break;
  }
  return sum;
}

// Beyond this the Lambert argument sits too close to -1/e for its
// subtraction to carry many digits; solve g(l) = target directly instead.
inline constexpr double kBranchFallback = 1e-6;

}  // namespace detail

/// g(l) = l e^{λl} / (e^{λl} - 1); increasing from 1/λ.
inline double g(double l, double rate) {
  if (l == 0.0) return 1.0 / rate;
  if (std::isinf(l)) return kInf;
  return l / -std::expm1(-rate * l);
}

/// h(l) = l / (e^{λl} - 1); decreasing from 1/λ to 0.
inline double h(double l, double rate) {
  if (l == 0.0) return 1.0 / rate;
  if (std::isinf(l)) return 0.0;
  return l / std::expm1(rate * l);
}

/// Largest bin count any equilibrium can have when the bias is negative.
inline std::uint64_t max_bins_negative_bias(double rate, double b) {
  detail::require_rate(rate);
  if (!(b < 0.0)) throw DomainError("bin-count bound applies to negative bias only");
  const double bound = std::floor(-1.0 / (2.0 * b * rate) + 1.0);
  if (!(bound < 9.0e15)) throw DomainError("bin-count bound is not representable");
  return static_cast<std::uint64_t>(bound);
}

/// Bias above which an equilibrium with at least n bins exists (n = 2 or 3).
inline double bias_threshold(double rate, int n) {
  detail::require_rate(rate);
  if (n == 2) return -1.0 / (2.0 * rate);
  if (n == 3) return -(1.0 / (2.0 * rate)) * (kE - 2.0) / (kE - 1.0);
  throw DomainError("bias thresholds are known for 2 and 3 bins only");
}

/// Positive root of g(l) = target, or BinCollapse(bin) when target <= 1/λ.
inline double length_for_target(double target, double rate, std::size_t bin) {
  const double u = rate * target;
  if (!(u > 1.0)) throw BinCollapse(bin, "bin length is not positive");
  const double x = -std::exp(std::log(u) - u);
  if (x + kInvEHi + kInvELo > detail::kBranchFallback) {
    const double l = (lambert_w0(x) + u) / rate;
    if (l > 0.0) return l;
  }
  auto f = [&](double l) { return g(l, rate) - target; };
  return find_root(f, make_bracket(f, 0.0, target), 0.0);
}

/// Edges {0, m_1, inf} of the two-bin equilibrium.
inline Partition solve_two_bin(double rate, double b) {
  detail::require_rate(rate);
  if (!(b > bias_threshold(rate, 2)))
    throw NoInformativeEquilibrium("bias at or below -1/(2 rate)");
  const double m1 = length_for_target(2.0 / rate + 2.0 * b, rate, 1);
  return Partition(SourceModel::exponential(rate), b, {0.0, m1, kInf});
}

/// Ψ(s) = (c - s) e^{λs} - (c + s) with c = 2/λ + 2b.
inline double psi(double s, double rate, double b) {
  const double c = 2.0 / rate + 2.0 * b;
  const double gap = c - s;
  return (gap == 0.0 ? 0.0 : gap * std::expm1(rate * s)) - 2.0 * s;
}

/// Common length l* of the equal-length infinite equilibrium.
inline double fixed_point_length(double rate, double b) {
  detail::require_rate(rate);
  detail::require_positive_bias(b);
  const double c = 2.0 / rate + 2.0 * b;
  // Ψ(s) e^{-λs}: same sign, no overflow.
  auto f = [&](double s) { return (c - s) - (c + s) * std::exp(-rate * s); };
  return find_root(f, make_bracket(f, 2.0 * b, c), 0.0);
}

namespace detail {

// Offsets d = l - l* satisfy Δg(d_k) = Δh(d_{k+1}) with
//   Δh(d) = h(l*) - h(l* + d),  Δg(d) = d - Δh(d),
// and Δg(d_{N-1}) = h(l*). Working with d keeps the geometric decay of the
// lengths toward l* visible far below the resolution of l* itself.
struct Offsets {
  double rate;
  double fixed;
  double grow;  // e^{λl*}

  double dh(double d) const {
    const double x = rate * d;
    const double num = d * (rate * fixed * grow - grow + 1.0) + fixed * grow * expm1_minus_x(x);
    return num / ((grow - 1.0) * (grow * std::exp(x) - 1.0));
  }
  double dg(double d) const { return d - dh(d); }

  // Δg is increasing with d/2 <= Δg(d) <= d, so [t, 2t] brackets Δg = t.
  double solve(double target) const {
    if (target == 0.0) return 0.0;
    auto f = [&](double d) { return dg(d) - target; };
    return find_root(f, make_bracket(f, target, 2.0 * target), 0.0);
  }
};

}  // namespace detail

/// Backward-recursion output for the finite bins l_1..l_{N-1}.
/// `c_values[k]` is the target g(l_{k+1}) = 2/λ + 2b - h(l_{k+2}).
/// For positive bias `fixed_point_excess[k]` holds l_{k+1} - l*.
struct RecursionState {
  std::vector<double> lengths;
  std::vector<double> c_values;
  std::vector<double> fixed_point_excess;
};

inline RecursionState backward_recursion(double rate, double b, std::size_t bins) {
  detail::require_rate(rate);
  if (bins == 0) throw DomainError("need at least one bin");
  RecursionState st;
  const std::size_t n = bins - 1;
  st.lengths.assign(n, 0.0);
  st.c_values.assign(n, 0.0);
  if (n == 0) return st;
  const double c = 2.0 / rate + 2.0 * b;

  if (b > 0.0) {
    const detail::Offsets off{rate, fixed_point_length(rate, b),
                              std::exp(rate * fixed_point_length(rate, b))};
    st.fixed_point_excess.assign(n, 0.0);
    double target = h(off.fixed, rate);
    for (std::size_t k = n; k-- > 0;) {
      const double d = off.solve(target);
      st.fixed_point_excess[k] = d;
      st.lengths[k] = off.fixed + d;
      target = off.dh(d);
    }
    for (std::size_t k = 0; k < n; ++k)
      st.c_values[k] = k + 1 < n ? c - h(st.lengths[k + 1], rate) : c;
    return st;
  }

  double target = c;
  for (std::size_t k = n; k-- > 0;) {
    st.c_values[k] = target;
    st.lengths[k] = length_for_target(target, rate, k + 1);
    target = c - h(st.lengths[k], rate);
  }
  return st;
}

inline Partition partition_from_lengths(double rate, double b, const std::vector<double>& lengths) {
  std::vector<double> edges{0.0};
  for (double l : lengths) edges.push_back(edges.back() + l);
  edges.push_back(kInf);
  return Partition(SourceModel::exponential(rate), b, std::move(edges));
}

/// N-bin equilibrium; BinCollapse when none exists with that many bins.
inline Partition solve_n_bins(double rate, double b, std::size_t bins) {
  return partition_from_lengths(rate, b, backward_recursion(rate, b, bins).lengths);
}

/// First K + 1 edges 0, l*, 2l*, ..., K l* of the infinite equilibrium.
struct Ladder {
  double fixed_length;
  std::vector<double> edges;
};

inline constexpr std::size_t kDefaultLadderDepth = 64;

inline Ladder infinite_equilibrium(double rate, double b, std::size_t depth = kDefaultLadderDepth) {
  if (depth == 0) throw DomainError("ladder depth must be at least 1");
  const double l = fixed_point_length(rate, b);
  Ladder out{l, std::vector<double>(depth + 1)};
  for (std::size_t k = 0; k <= depth; ++k) out.edges[k] = static_cast<double>(k) * l;
  return out;
}

/// Residuals at edges 1..K-1, each from the centroids of its two finite
/// neighbours.
inline std::vector<double> ladder_residuals(const Ladder& ladder, double rate, double b) {
  const auto src = SourceModel::exponential(rate);
  const auto& m = ladder.edges;
  std::vector<double> out;
  for (std::size_t k = 1; k + 1 < m.size(); ++k) {
    const double left = truncated_mean(src, m[k - 1], m[k]);
    const double right = truncated_mean(src, m[k], m[k + 1]);
    out.push_back(m[k] - 0.5 * (left + right) - b);
  }
  return out;
}

namespace detail {

// s / (2 sinh(λs/2)); its square is the variance deficit of a bin of length s.
inline double half_width_ratio(double s, double rate) {
  if (s == 0.0) return 1.0 / rate;
  const double x = 0.5 * rate * s;
  return s / (2.0 * std::sinh(x));
}

// half_width_ratio(s) - half_width_ratio(s + d) without cancellation.
inline double half_width_ratio_drop(double s, double d, double rate) {
  const double x = 0.5 * rate * s;
  const double dx = 0.5 * rate * d;
  const double sh = std::sinh(x), ch = std::cosh(x);
  const double half = std::sinh(0.5 * dx);
  const double num = s * sh * 2.0 * half * half + s * ch * sinh_minus_x(dx) +
                     d * (x * ch - sh);
  return num / (2.0 * sh * std::sinh(x + dx));
}

}  // namespace detail

/// J^{d,∞} = 1/λ² - (l*)² / (e^{λl*} + e^{-λl*} - 2).
inline double decoder_cost_infinite(double rate, double b) {
  const double a = detail::half_width_ratio(fixed_point_length(rate, b), rate);
  return 1.0 / (rate * rate) - a * a;
}

/// J^{d,N} - J^{d,∞} for the N-bin recursion output, summed bin by bin so
/// that gaps far below the resolution of J itself remain positive.
inline double decoder_cost_excess(double rate, double b, std::size_t bins) {
  const auto st = backward_recursion(rate, b, bins);
  const double fixed = fixed_point_length(rate, b);
  const double a_fixed = detail::half_width_ratio(fixed, rate);
  double sum = 0.0;
  double left = 0.0;
  for (std::size_t i = 0; i < st.lengths.size(); ++i) {
    const double l = st.lengths[i];
    const double prob = std::exp(-rate * left) * -std::expm1(-rate * l);
    const double drop = detail::half_width_ratio_drop(fixed, st.fixed_point_excess[i], rate);
    sum += prob * drop * (2.0 * a_fixed - drop);
    left += l;
  }
  return sum + std::exp(-rate * left) * a_fixed * a_fixed;
}

}  // namespace cheaptalk::exponential
