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

// Equilibria for a Gaussian source: the two-bin edge, half-line bin bounds,
// damped fixed-point iteration for finite-N partitions and truncated
// infinite ladders.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include <boost/math/tools/minima.hpp>

#include "cheaptalk/equilibrium.hpp"
#include "cheaptalk/errors.hpp"
#include "cheaptalk/sources.hpp"
#include "cheaptalk/special_fn.hpp"

namespace cheaptalk::gaussian {

/// f(c) = 2c - φ(c)/(1-Φ(c)) + φ(c)/Φ(c). The two-bin edge solves f(c) = 2b/σ.
inline double two_bin_map(double c) { return 2.0 * c - mills_ratio(c) + mills_ratio(-c); }

/// Normalised two-bin edge c = (m_1 - μ)/σ for the scaled bias b/σ.
inline double two_bin_root(double scaled_bias) {
  if (!std::isfinite(scaled_bias)) throw DomainError("bias must be finite");
  const double target = 2.0 * scaled_bias;
  if (target == 0.0) return 0.0;
  auto f = [target](double c) { return two_bin_map(c) - target; };
  const double dir = target > 0.0 ? 1.0 : -1.0;
  double reach = 1.0;
  while (dir * f(dir * reach) < 0.0) {
    reach *= 2.0;
    if (reach > 1e300) throw NonConvergence(0, "two-bin bracket expansion failed");
  }
  const double lo = std::min(0.0, dir * reach), hi = std::max(0.0, dir * reach);
  return find_root(f, make_bracket(f, lo, hi), 0.0);
}

inline Partition solve_two_bin_gauss(double mean, double stddev, double b) {
  const auto src = SourceModel::gaussian(mean, stddev);
  return Partition(src, b, {mean + stddev * two_bin_root(b / stddev)});
}

/// Smallest central-difference derivative of the two-bin map over a grid.
inline double f_derivative_floor_check(const std::vector<double>& grid) {
  constexpr double step = 1e-5;
  double lowest = kInf;
  for (double c : grid) {
    if (!std::isfinite(c)) throw DomainError("grid points must be finite");
    const double d = (two_bin_map(c + step) - two_bin_map(c - step)) / (2.0 * step);
    lowest = std::min(lowest, d);
  }
  return lowest;
}

struct Peak {
  double location;
  double value;
};

/// Maximiser of c φ(c)/Φ(c) over c > 0.
inline Peak ratio_peak() {
  auto neg = [](double c) { return -c * std_normal_pdf(c) / std_normal_cdf(c); };
  const auto r = boost::math::tools::brent_find_minima(neg, 0.0, 5.0, 52);
  return {r.first, -r.second};
}

/// floor(σ / (2|b|)): bins on the bounded half-line.
inline std::size_t half_line_bin_bound(double stddev, double b) {
  if (!(stddev > 0.0)) throw DomainError("standard deviation must be positive");
  if (b == 0.0 || !std::isfinite(b)) throw DomainError("half-line bound needs a nonzero finite bias");
  const double bound = std::floor(stddev / (2.0 * std::abs(b)));
  if (!(bound < 9.0e15)) throw DomainError("half-line bound is not representable");
  return static_cast<std::size_t>(bound);
}

/// Limiting bin length 2|b| far from the mean.
inline double asymptotic_bin_length(double b) {
  if (b == 0.0 || !std::isfinite(b)) throw DomainError("asymptotic length needs a nonzero finite bias");
  return 2.0 * std::abs(b);
}

/// Truncated infinite ladder. For b > 0 the anchor is the left-most edge
/// and the ladder grows rightwards (direction +1); for b < 0 it is the
/// right-most edge and the ladder grows leftwards (direction -1).
struct TruncatedLadder {
  double anchor_edge = 0.0;
  std::vector<double> lengths;
  std::size_t margin = 5;
  int direction = 1;

  std::size_t edge_count() const noexcept { return lengths.size() + 1; }

  /// Edges in increasing order.
  std::vector<double> edges() const {
    std::vector<double> e{anchor_edge};
    for (double l : lengths) e.push_back(e.back() + direction * l);
    if (direction < 0) std::reverse(e.begin(), e.end());
    return e;
  }
};

struct LadderBox {
  double anchor_lo;
  double anchor_hi;
  double length_lo;
  double length_hi;

  bool contains(const TruncatedLadder& ladder) const {
    if (!(ladder.anchor_edge >= anchor_lo && ladder.anchor_edge <= anchor_hi)) return false;
    return std::all_of(ladder.lengths.begin(), ladder.lengths.end(),
                       [&](double l) { return l >= length_lo && l <= length_hi; });
  }
};

/// Region that must contain every infinite-ladder equilibrium.
inline LadderBox ladder_box(double mean, double stddev, double b) {
  const double bound = static_cast<double>(half_line_bin_bound(stddev, b));
  const double ab = std::abs(b);
  const double far = bound * (2.0 * stddev - 2.0 * ab) + 2.0 * stddev;
  const double near = 2.0 * ab + stddev;
  if (b > 0.0) return {mean - far, mean + near, 2.0 * ab, 2.0 * ab + 2.0 * stddev};
  return {mean - near, mean + far, 2.0 * ab, 2.0 * ab + 2.0 * stddev};
}

inline constexpr std::size_t kDefaultLadderEdges = 60;
inline constexpr std::size_t kDefaultMargin = 5;
inline constexpr double kDefaultDamping = 0.5;
inline constexpr std::size_t kDefaultMaxIter = 100000;
inline constexpr double kDefaultIterTol = 1e-10;

inline double default_spacing(double stddev, double b) {
  return std::max(2.0 * std::abs(b), 0.25 * stddev);
}

/// K equally spaced edges starting at the two-bin edge.
inline TruncatedLadder default_ladder(double mean, double stddev, double b,
                                      std::size_t edges = kDefaultLadderEdges,
                                      std::size_t margin = kDefaultMargin) {
  if (b == 0.0) throw DomainError("an infinite ladder needs a nonzero bias");
  if (edges < 1) throw DomainError("a ladder needs at least one edge");
  TruncatedLadder out;
  out.anchor_edge = mean + stddev * two_bin_root(b / stddev);
  out.lengths.assign(edges - 1, default_spacing(stddev, b));
  out.margin = margin;
  out.direction = b > 0.0 ? 1 : -1;
  return out;
}

struct LadderResult {
  TruncatedLadder ladder;
  std::vector<double> residuals;  // edges 1 .. K - margin, in ladder order
  double max_abs_residual = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
};

namespace detail {

// One application of the combined map on increasing edges. `lo` and `hi`
// close the outer bins.
inline std::vector<double> combined_map(const SourceModel& src, double b,
                                        const std::vector<double>& edges, double lo, double hi) {
  std::vector<double> full;
  full.reserve(edges.size() + 2);
  full.push_back(lo);
  full.insert(full.end(), edges.begin(), edges.end());
  full.push_back(hi);
  return nearest_neighbour_edges(bin_centroids(src, full), b);
}

// Damped iteration on increasing edges. `closure` maps the current edges
// to the upper closing edge (kInf for a finite partition).
template <class Closure>
std::pair<std::vector<double>, std::size_t> damped_iterate(const SourceModel& src, double b,
                                                           std::vector<double> m, double theta,
                                                           std::size_t max_iter, double tol,
                                                           Closure&& closure, bool* converged) {
  if (!(theta > 0.0 && theta <= 1.0)) throw DomainError("damping must lie in (0, 1]");
  *converged = false;
  for (std::size_t it = 1; it <= max_iter; ++it) {
    const auto t = combined_map(src, b, m, -kInf, closure(m));
    double change = 0.0;
    for (std::size_t k = 0; k < m.size(); ++k) {
      const double next = (1.0 - theta) * m[k] + theta * t[k];
      change = std::max(change, std::abs(next - m[k]));
      m[k] = next;
    }
    for (std::size_t k = 1; k < m.size(); ++k)
      if (!(m[k - 1] < m[k])) throw EdgeOrderingViolation(it, k + 1);
    if (!std::all_of(m.begin(), m.end(), [](double x) { return std::isfinite(x); }))
      throw EdgeOrderingViolation(it, 0);
    if (change <= tol) {
      *converged = true;
      return {std::move(m), it};
    }
  }
  return {std::move(m), max_iter};
}

}  // namespace detail

/// Damped fixed-point iteration m <- (1-θ) m + θ T(m) on a truncated ladder.
/// The bin past the last edge is closed at length 2|b|. Throws
/// EdgeOrderingViolation; running out of iterations is reported in the result.
inline LadderResult iterate_map_T(const TruncatedLadder& start, const SourceModel& src, double b,
                                  double theta = kDefaultDamping,
                                  std::size_t max_iter = kDefaultMaxIter,
                                  double tol = kDefaultIterTol) {
  if (!src.is_gaussian()) throw DomainError("ladder iteration needs a gaussian source");
  if (b == 0.0) throw DomainError("an infinite ladder needs a nonzero bias");
  if ((b > 0.0) != (start.direction > 0)) throw DomainError("ladder direction must follow the bias sign");
  if (start.margin >= start.edge_count()) throw DomainError("margin leaves no edges to certify");

  // Work in the orientation where the ladder grows rightwards.
  const double sign = b > 0.0 ? 1.0 : -1.0;
  const auto work_src = SourceModel::gaussian(sign * src.mean(), src.stddev());
  const double work_b = sign * b;
  std::vector<double> m{sign * start.anchor_edge};
  for (double l : start.lengths) {
    if (!(l > 0.0)) throw DomainError("ladder lengths must be positive");
    m.push_back(m.back() + l);
  }
  const double step = 2.0 * work_b;
  bool converged = false;
  auto [edges, iters] = detail::damped_iterate(work_src, work_b, std::move(m), theta, max_iter, tol,
                                               [step](const std::vector<double>& e) {
                                                 return e.back() + step;
                                               },
                                               &converged);

  LadderResult out;
  out.iterations = iters;
  out.converged = converged;
  out.ladder = start;
  out.ladder.anchor_edge = sign * edges.front();
  for (std::size_t k = 1; k < edges.size(); ++k) out.ladder.lengths[k - 1] = edges[k] - edges[k - 1];

  const auto t = detail::combined_map(work_src, work_b, edges, -kInf, edges.back() + step);
  const std::size_t certified = edges.size() - start.margin;
  for (std::size_t k = 0; k < certified; ++k) {
    const double r = sign * (edges[k] - t[k]);
    out.residuals.push_back(r);
    out.max_abs_residual = std::max(out.max_abs_residual, std::abs(r));
  }
  return out;
}

/// Finite N-bin equilibrium found by damped iteration from `init` (or equal
/// spacing around the two-bin edge). Throws NonConvergence or
/// EdgeOrderingViolation.
inline Partition solve_n_bins_gauss(double mean, double stddev, double b, std::size_t bins,
                                    const std::optional<Partition>& init = std::nullopt,
                                    double theta = kDefaultDamping,
                                    std::size_t max_iter = kDefaultMaxIter,
                                    double tol = kDefaultIterTol) {
  const auto src = SourceModel::gaussian(mean, stddev);
  if (bins == 0) throw DomainError("need at least one bin");
  if (bins == 1) return Partition::single_bin(src, b);
  if (bins == 2 && !init) return solve_two_bin_gauss(mean, stddev, b);

  std::vector<double> m;
  if (init) {
    if (init->bins() != bins || !(init->source() == src))
      throw DomainError("initial partition does not match the requested problem");
    m = init->interior_edges();
  } else {
    const double anchor = mean + stddev * two_bin_root(b / stddev);
    const double w = default_spacing(stddev, b);
    const double centre = 0.5 * static_cast<double>(bins - 2);
    for (std::size_t k = 0; k + 1 < bins; ++k) m.push_back(anchor + (static_cast<double>(k) - centre) * w);
  }
  bool converged = false;
  auto [edges, iters] = detail::damped_iterate(
      src, b, std::move(m), theta, max_iter, tol, [](const std::vector<double>&) { return kInf; },
      &converged);
  if (!converged) throw NonConvergence(iters, "gaussian N-bin iteration did not converge");
  return Partition(src, b, std::move(edges));
}

}  // namespace cheaptalk::gaussian
