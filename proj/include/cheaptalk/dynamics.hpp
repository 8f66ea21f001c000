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

// Best-response dynamics: Lloyd's Method I and damped fixed-point iteration,
// with trace recording, random starts and a basin probe.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "cheaptalk/equilibrium.hpp"
#include "cheaptalk/errors.hpp"
#include "cheaptalk/sources.hpp"

namespace cheaptalk {

enum class Outcome { converged, collapsed, max_iter };

inline const char* to_string(Outcome o) {
  switch (o) {
    case Outcome::converged: return "converged";
    case Outcome::collapsed: return "collapsed";
    case Outcome::max_iter: return "max_iter";
  }
  return "unknown";
}

struct IterationTrace {
  std::vector<Partition> iterates;
  std::vector<std::size_t> iterate_index;  // iteration number of each snapshot
  std::vector<double> residual_history;    // sup |m - T(m)| per iteration
  Outcome outcome = Outcome::max_iter;
  std::size_t iterations = 0;
  std::size_t collapsed_bin = 0;  // 1-based, set when outcome is collapsed

  const Partition& final_partition() const { return iterates.back(); }
};

enum class Method { lloyd, fixed_point };

inline constexpr std::size_t kFullTraceIterations = 1000;
inline constexpr std::size_t kTraceStride = 10;
inline constexpr double kCollapseMass = 1e-14;
inline constexpr double kCollapseLength = 1e-12;

namespace detail {

inline bool keep_snapshot(std::size_t it) {
  return it <= kFullTraceIterations || it % kTraceStride == 0;
}

// 1-based index of the first degenerate bin, or 0.
inline std::size_t collapsed_bin(const SourceModel& src, const std::vector<double>& full) {
  for (std::size_t k = 1; k < full.size(); ++k) {
    const double lo = full[k - 1], hi = full[k];
    if (std::isnan(hi) || !(lo < hi)) return k;
    if (std::isfinite(lo) && std::isfinite(hi) && hi - lo < kCollapseLength) return k;
    if (interval_prob(src, lo, hi) < kCollapseMass) return k;
  }
  return 0;
}

inline IterationTrace run_dynamics(const SourceModel& src, double b, const Partition& init,
                                   double theta, std::size_t max_iter, double tol) {
  if (!(theta > 0.0 && theta <= 1.0)) throw DomainError("damping must lie in (0, 1]");
  if (!(init.source() == src)) throw DomainError("initial partition uses a different source");
  IterationTrace tr;
  Partition current = init.with_bias(b);
  tr.iterates.push_back(current);
  tr.iterate_index.push_back(0);

  for (std::size_t it = 1; it <= max_iter; ++it) {
    tr.iterations = it;
    const auto& full = current.edges();
    const auto target = nearest_neighbour_edges(bin_centroids(src, full), b);
    double residual = 0.0;
    for (std::size_t k = 0; k < target.size(); ++k)
      residual = std::max(residual, std::abs(full[k + 1] - target[k]));
    tr.residual_history.push_back(residual);
    if (residual <= tol) {
      tr.outcome = Outcome::converged;
      if (tr.iterate_index.back() != it - 1) {
        tr.iterates.push_back(current);
        tr.iterate_index.push_back(it - 1);
      }
      return tr;
    }

    std::vector<double> next = full;
    for (std::size_t k = 0; k < target.size(); ++k)
      next[k + 1] = (1.0 - theta) * full[k + 1] + theta * target[k];
    if (const std::size_t bad = collapsed_bin(src, next)) {
      tr.outcome = Outcome::collapsed;
      tr.collapsed_bin = bad;
      return tr;
    }
    current = Partition(src, b, std::move(next));
    if (keep_snapshot(it) || it == max_iter) {
      tr.iterates.push_back(current);
      tr.iterate_index.push_back(it);
    }
  }
  tr.outcome = Outcome::max_iter;
  return tr;
}

}  // namespace detail

/// Alternate centroid and nearest-neighbour updates until the edges stop
/// moving (sup-norm change <= tol), a bin collapses, or max_iter.
inline IterationTrace lloyd_method_i(const SourceModel& src, double b, const Partition& init,
                                     std::size_t max_iter = 100000, double tol = 1e-10) {
  return detail::run_dynamics(src, b, init, 1.0, max_iter, tol);
}

/// m <- (1-θ) m + θ T(m). Stops once sup |m - T(m)| <= tol.
inline IterationTrace fixed_point_iterate(const SourceModel& src, double b, const Partition& init,
                                          double theta = 0.5, std::size_t max_iter = 100000,
                                          double tol = 1e-10) {
  return detail::run_dynamics(src, b, init, theta, max_iter, tol);
}

inline constexpr double kInitQuantileLo = 0.001;
inline constexpr double kInitQuantileHi = 0.999;

/// N bins with interior edges drawn as sorted uniforms between the source's
/// 0.001 and 0.999 quantiles.
inline Partition random_initial_partition(const SourceModel& src, double b, std::size_t bins,
                                          std::uint64_t seed) {
  if (bins == 0) throw DomainError("need at least one bin");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(src.quantile(kInitQuantileLo),
                                              src.quantile(kInitQuantileHi));
  for (;;) {
    std::vector<double> m(bins - 1);
    for (double& x : m) x = unif(rng);
    std::sort(m.begin(), m.end());
    if (std::adjacent_find(m.begin(), m.end()) == m.end()) return Partition(src, b, std::move(m));
  }
}

struct BasinSummary {
  std::size_t runs = 0;
  std::size_t converged = 0;
  std::size_t collapsed = 0;
  std::size_t exhausted = 0;
  std::vector<std::vector<double>> limits;  // interior edges of each distinct limit
  std::vector<std::size_t> limit_counts;

  double converged_fraction() const {
    return runs ? static_cast<double>(converged) / static_cast<double>(runs) : 0.0;
  }
};

struct DynamicsOptions {
  Method method = Method::lloyd;
  double theta = 0.5;
  std::size_t max_iter = 100000;
  double tol = 1e-10;
};

inline constexpr double kClusterTol = 1e-6;

inline IterationTrace run_method(const SourceModel& src, double b, const Partition& init,
                                 const DynamicsOptions& opt) {
  return opt.method == Method::lloyd
             ? lloyd_method_i(src, b, init, opt.max_iter, opt.tol)
             : fixed_point_iterate(src, b, init, opt.theta, opt.max_iter, opt.tol);
}

/// Seed of the i-th random start in a probe.
inline std::uint64_t init_seed(std::uint64_t seed, std::size_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index)};
  std::uint32_t words[2];
  seq.generate(words, words + 2);
  return (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
}

/// Run the chosen method from n random starts and cluster the limits.
inline BasinSummary basin_probe(const SourceModel& src, double b, std::size_t bins,
                                std::size_t n_inits, std::uint64_t seed,
                                const DynamicsOptions& opt = {}) {
  if (n_inits == 0) throw DomainError("basin probe needs at least one start");
  BasinSummary s;
  for (std::size_t i = 0; i < n_inits; ++i) {
    const auto tr = run_method(src, b, random_initial_partition(src, b, bins, init_seed(seed, i)), opt);
    ++s.runs;
    if (tr.outcome == Outcome::collapsed) ++s.collapsed;
    if (tr.outcome == Outcome::max_iter) ++s.exhausted;
    if (tr.outcome != Outcome::converged) continue;
    ++s.converged;
    const auto edges = tr.final_partition().interior_edges();
    auto near = std::find_if(s.limits.begin(), s.limits.end(), [&](const std::vector<double>& l) {
      for (std::size_t k = 0; k < l.size(); ++k)
        if (std::abs(l[k] - edges[k]) > kClusterTol) return false;
      return true;
    });
    if (near == s.limits.end()) {
      s.limits.push_back(edges);
      s.limit_counts.push_back(1);
    } else {
      ++s.limit_counts[static_cast<std::size_t>(near - s.limits.begin())];
    }
  }
  return s;
}

}  // namespace cheaptalk
