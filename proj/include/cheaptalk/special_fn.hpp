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

// Real-branch Lambert W, standard-normal helpers, and a bracketing root finder.
//
// Everything here is a pure function of its arguments.

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include "cheaptalk/errors.hpp"

namespace cheaptalk {

inline constexpr double kE = 2.718281828459045;
// 1/e split into a double and its rounding error so that x + 1/e keeps full
// relative precision next to the branch point.
inline constexpr double kInvEHi = 0.36787944117144233;
inline constexpr double kInvELo = -1.2428753672788363e-17;
inline constexpr double kSqrt2 = 1.4142135623730951;
inline constexpr double kInvSqrt2Pi = 0.3989422804014327;
inline constexpr double kLogSqrt2Pi = 0.91893853320467274;
inline constexpr double kSqrt2OverPi = 0.79788456080286536;

// Inputs this far below -1/e are still treated as the branch point.
inline constexpr double kBranchPointSlack = 1e-12;

namespace detail {

// Series of W about the branch point in p = sqrt(2(e x + 1)); p < 0 gives W_{-1}.
inline double lambert_branch_series(double p) {
  constexpr double c[] = {-1.0,
                          1.0,
                          -1.0 / 3.0,
                          11.0 / 72.0,
                          -43.0 / 540.0,
                          769.0 / 17280.0,
                          -221.0 / 8505.0,
                          680863.0 / 43545600.0,
                          -1963.0 / 204120.0,
                          226287557.0 / 37623398400.0};
  double acc = 0.0;
  for (int k = 9; k >= 0; --k) acc = acc * p + c[k];
  return acc;
}

// Halley refinement of w e^w = x.
inline double lambert_halley(double x, double w) {
  constexpr double eps = std::numeric_limits<double>::epsilon();
  for (int it = 0; it < 64; ++it) {
    const double ew = std::exp(w);
    const double f = w * ew - x;
    if (f == 0.0) break;
    const double wp1 = w + 1.0;
    if (wp1 == 0.0) break;
    const double denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1);
    const double dw = f / denom;
    w -= dw;
    if (std::abs(dw) <= 2.0 * eps * (1.0 + std::abs(w))) break;
  }
  return w;
}

// Distance x - (-1/e), or a DomainError when x lies below the clamp window.
inline double branch_offset(double x, const char* who) {
  const double d = (x + kInvEHi) + kInvELo;
  if (d < -kBranchPointSlack) throw DomainError(std::string(who) + ": argument below -1/e");
  return d;
}

}  // namespace detail

/// Principal branch W0 on [-1/e, inf).
inline double lambert_w0(double x) {
  if (std::isnan(x)) return x;
  const double d = detail::branch_offset(x, "lambert_w0");
  if (d <= 0.0) return -1.0;
  if (x == 0.0) return 0.0;
  if (std::isinf(x)) return x;

  if (d < 0.05) {
    const double p = std::sqrt(2.0 * kE * d);
    const double w = detail::lambert_branch_series(p);
    return p < 1e-3 ? w : detail::lambert_halley(x, w);
  }
  if (x > 1e200) {
    // Newton on w + log(w) = log(x); w e^w would overflow on the way.
    const double lx = std::log(x);
    double w = lx - std::log(lx);
    for (int it = 0; it < 32; ++it) {
      const double dw = (w + std::log(w) - lx) / (1.0 + 1.0 / w);
      w -= dw;
      if (std::abs(dw) <= 4.0 * std::numeric_limits<double>::epsilon() * w) break;
    }
    return w;
  }
  const double l = std::log1p(x);
  const double seed = l * (1.0 - std::log1p(l) / (2.0 + l));
  return detail::lambert_halley(x, seed);
}

/// Lower branch W_{-1} on [-1/e, 0).
inline double lambert_w_minus1(double x) {
  if (std::isnan(x)) return x;
  if (x >= 0.0) throw DomainError("lambert_w_minus1: argument must be negative");
  const double d = detail::branch_offset(x, "lambert_w_minus1");
  if (d <= 0.0) return -1.0;

  if (d < 0.05) {
    const double p = -std::sqrt(2.0 * kE * d);
    const double w = detail::lambert_branch_series(p);
    return p > -1e-3 ? w : detail::lambert_halley(x, w);
  }
  const double l1 = std::log(-x);
  const double l2 = std::log(-l1);
  return detail::lambert_halley(x, l1 - l2 + l2 / l1);
}

inline double std_normal_pdf(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

inline double std_normal_cdf(double x) { return 0.5 * std::erfc(-x / kSqrt2); }

/// Upper tail 1 - Phi(x), computed without subtracting from one.
inline double std_normal_sf(double x) { return 0.5 * std::erfc(x / kSqrt2); }

/// Scaled upper tail (1 - Phi(x)) / phi(x). Finite for every x >= 0, where it
/// decays like 1/x; the deep tail uses the Laplace continued fraction
/// 1/(x + 1/(x + 2/(x + 3/(x + ...)))).
inline double upper_tail_ratio(double x) {
  if (x < 6.0) return std_normal_sf(x) / std_normal_pdf(x);
  if (std::isinf(x)) return 0.0;
  // Modified Lentz on the denominator x + 1/(x + 2/(x + ...)).
  constexpr double tiny = 1e-300;
  double f = x;
  double c = f;
  double dl = 0.0;
  for (int n = 1; n < 500; ++n) {
    dl = x + n * dl;
    if (dl == 0.0) dl = tiny;
    dl = 1.0 / dl;
    c = x + n / c;
    if (c == 0.0) c = tiny;
    const double delta = c * dl;
    f *= delta;
    if (std::abs(delta - 1.0) < 1e-16) break;
  }
  return 1.0 / f;
}

/// log(1 - Phi(x)), finite far beyond the point where the tail underflows.
inline double log_std_normal_sf(double x) {
  if (x >= 0.0) return -0.5 * x * x - kLogSqrt2Pi + std::log(upper_tail_ratio(x));
  return std::log1p(-std_normal_sf(-x));
}

/// Mills ratio phi(x) / (1 - Phi(x)).
inline double mills_ratio(double x) {
  if (x >= 0.0) return 1.0 / upper_tail_ratio(x);
  return std_normal_pdf(x) / std_normal_sf(x);
}

/// Interval [lo, hi] on which f changes sign (or vanishes at an end).
struct Bracket {
  double lo;
  double hi;
  double f_lo;
  double f_hi;
};

namespace detail {
inline void check_bracket(const Bracket& br) {
  if (!(br.lo < br.hi)) throw InvalidBracket("bracket requires lo < hi");
  if (std::isnan(br.f_lo) || std::isnan(br.f_hi))
    throw InvalidBracket("function is NaN at a bracket end");
  if ((br.f_lo > 0.0 && br.f_hi > 0.0) || (br.f_lo < 0.0 && br.f_hi < 0.0))
    throw InvalidBracket("function values at bracket ends share a sign");
}
}  // namespace detail

template <class F>
Bracket make_bracket(F&& f, double lo, double hi) {
  Bracket br{lo, hi, f(lo), f(hi)};
  detail::check_bracket(br);
  return br;
}

/// Brent's method: inverse quadratic / secant steps guarded by bisection.
/// Terminates once the bracket is narrower than about tol (plus a few ulps
/// of the iterate) or f hits zero exactly.
template <class F>
double find_root(F&& f, const Bracket& br, double tol, int max_iter = 300) {
  detail::check_bracket(br);
  if (br.f_lo == 0.0) return br.lo;
  if (br.f_hi == 0.0) return br.hi;
  constexpr double eps = std::numeric_limits<double>::epsilon();

  double a = br.lo, b = br.hi, fa = br.f_lo, fb = br.f_hi;
  double c = a, fc = fa;
  double d = b - a, e = d;
  for (int it = 0; it < max_iter; ++it) {
    if ((fb > 0.0 && fc > 0.0) || (fb < 0.0 && fc < 0.0)) {
      c = a;
      fc = fa;
      d = e = b - a;
    }
    if (std::abs(fc) < std::abs(fb)) {
      a = b;
      b = c;
      c = a;
      fa = fb;
      fb = fc;
      fc = fa;
    }
    const double tol1 = 2.0 * eps * std::abs(b) + 0.5 * tol;
    const double xm = 0.5 * (c - b);
    if (std::abs(xm) <= tol1 || fb == 0.0) return b;

    if (std::abs(e) >= tol1 && std::abs(fa) > std::abs(fb)) {
      const double s = fb / fa;
      double p, q;
      if (a == c) {
        p = 2.0 * xm * s;
        q = 1.0 - s;
      } else {
        const double qq = fa / fc;
        const double r = fb / fc;
        p = s * (2.0 * xm * qq * (qq - r) - (b - a) * (r - 1.0));
        q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
      }
      if (p > 0.0) {
        q = -q;
      } else {
        p = -p;
      }
      if (2.0 * p < std::min(3.0 * xm * q - std::abs(tol1 * q), std::abs(e * q))) {
        e = d;
        d = p / q;
      } else {
        d = xm;
        e = d;
      }
    } else {
      d = xm;
      e = d;
    }
    a = b;
    fa = fb;
    b += std::abs(d) > tol1 ? d : std::copysign(tol1, xm);
    fb = f(b);
  }
  return b;
}

}  // namespace cheaptalk
