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

// Partitions, decoder actions, best responses, certificates and costs.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <utility>
#include <vector>

#include "cheaptalk/errors.hpp"
#include "cheaptalk/sources.hpp"

namespace cheaptalk {

/// Ordered bin edges m_0 < m_1 < ... < m_N over the support of a source.
/// The outer edges always equal the support endpoints; constructors accept
/// edge lists with or without them.
class Partition {
 public:
  Partition(const SourceModel& src, double bias, std::vector<double> edges)
      : src_(src), bias_(bias), edges_(std::move(edges)) {
    normalize();
    validate();
  }

  static Partition single_bin(const SourceModel& src, double bias) {
    return Partition(src, bias, {});
  }

  const SourceModel& source() const noexcept { return src_; }
  double bias() const noexcept { return bias_; }
  const std::vector<double>& edges() const noexcept { return edges_; }
  std::size_t bins() const noexcept { return edges_.size() - 1; }

  std::vector<double> interior_edges() const {
    return {edges_.begin() + 1, edges_.end() - 1};
  }

  /// l_k = m_k - m_{k-1}; infinite for unbounded bins.
  std::vector<double> lengths() const {
    std::vector<double> out(bins());
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = edges_[k + 1] - edges_[k];
    return out;
  }

  Partition with_bias(double bias) const { return Partition(src_, bias, edges_); }

  friend bool operator==(const Partition&, const Partition&) = default;

 private:
  void normalize() {
    const double lo = src_.support_lo();
    if (!edges_.empty() && src_.is_exponential() && edges_.front() == -kInf)
      edges_.front() = lo;
    if (edges_.empty() || edges_.front() != lo) edges_.insert(edges_.begin(), lo);
    if (edges_.size() < 2 || edges_.back() != kInf) edges_.push_back(kInf);
  }

  void validate() const {
    if (!std::isfinite(bias_)) throw InvalidPartition("bias must be finite");
    for (std::size_t k = 1; k < edges_.size(); ++k) {
      if (std::isnan(edges_[k]) || !(edges_[k - 1] < edges_[k]))
        throw InvalidPartition("edges must be strictly increasing");
      if (k + 1 < edges_.size() && !std::isfinite(edges_[k]))
        throw InvalidPartition("interior edges must be finite");
      if (log_interval_prob(src_, edges_[k - 1], edges_[k]) == -kInf)
        throw InvalidPartition("bin " + std::to_string(k) + " has zero probability");
    }
  }

  SourceModel src_;
  double bias_;
  std::vector<double> edges_;
};

/// Decoder actions u_1..u_N, one per bin.
struct ActionProfile {
  std::vector<double> centroids;
};

struct EquilibriumCertificate {
  std::vector<double> residuals;
  double max_abs_residual = 0.0;
  double tolerance = 0.0;
  bool verdict = true;
};

struct BinCost {
  double probability;
  double variance;
};

struct CostReport {
  double decoder_cost = 0.0;
  double encoder_cost = 0.0;
  std::vector<BinCost> per_bin;
};

struct MonteCarloEstimate {
  double mean;
  double standard_error;
};

inline constexpr double kDefaultCertifyTol = 1e-8;

/// Conditional means of the bins of an unvalidated edge list.
inline std::vector<double> bin_centroids(const SourceModel& src, const std::vector<double>& edges) {
  std::vector<double> u;
  if (edges.size() < 2) return u;
  u.reserve(edges.size() - 1);
  for (std::size_t k = 1; k < edges.size(); ++k)
    u.push_back(truncated_mean(src, edges[k - 1], edges[k]));
  return u;
}

/// Centroid of every bin.
inline ActionProfile decoder_best_response(const Partition& p) {
  return {bin_centroids(p.source(), p.edges())};
}

/// Raw interior edges (u_k + u_{k+1})/2 + b with no ordering checks.
inline std::vector<double> nearest_neighbour_edges(const std::vector<double>& u, double b) {
  std::vector<double> out;
  if (u.size() < 2) return out;
  out.reserve(u.size() - 1);
  for (std::size_t k = 0; k + 1 < u.size(); ++k) out.push_back(0.5 * (u[k] + u[k + 1]) + b);
  return out;
}

/// Encoder's response to fixed actions. Throws BinCollapse when the
/// resulting edges are out of order or a centroid falls outside its bin.
inline Partition encoder_best_response(const ActionProfile& u, double b, const SourceModel& src) {
  const auto& c = u.centroids;
  if (c.empty()) throw DomainError("action profile is empty");
  for (std::size_t k = 1; k < c.size(); ++k)
    if (!(c[k - 1] < c[k])) throw DomainError("actions must be strictly increasing");

  std::vector<double> m{src.support_lo()};
  for (double e : nearest_neighbour_edges(c, b)) m.push_back(e);
  m.push_back(src.support_hi());
  for (std::size_t k = 1; k < m.size(); ++k) {
    if (!(m[k - 1] < m[k])) throw BinCollapse(k, "encoder best response collapses a bin");
    if (!(m[k - 1] < c[k - 1] && c[k - 1] < m[k]))
      throw BinCollapse(k, "action lies outside its bin");
  }
  try {
    return Partition(src, b, std::move(m));
  } catch (const InvalidPartition& e) {
    throw NoEquilibrium(e.what());
  }
}

/// Residuals m_k - (u_k + u_{k+1})/2 - b at every interior edge.
inline EquilibriumCertificate certify(const Partition& p, double tol = kDefaultCertifyTol) {
  const auto u = decoder_best_response(p);
  const auto target = nearest_neighbour_edges(u.centroids, p.bias());
  const auto& m = p.edges();
  EquilibriumCertificate cert;
  cert.tolerance = tol;
  cert.residuals.reserve(target.size());
  for (std::size_t k = 0; k < target.size(); ++k) {
    const double r = m[k + 1] - target[k];
    cert.residuals.push_back(r);
    cert.max_abs_residual = std::max(cert.max_abs_residual, std::abs(r));
  }
  cert.verdict = cert.max_abs_residual <= tol;
  return cert;
}

inline CostReport decoder_cost(const Partition& p) {
  const auto& m = p.edges();
  CostReport r;
  r.per_bin.reserve(p.bins());
  for (std::size_t k = 1; k < m.size(); ++k) {
    const BinCost bc{interval_prob(p.source(), m[k - 1], m[k]),
                     truncated_variance(p.source(), m[k - 1], m[k])};
    r.decoder_cost += bc.probability * bc.variance;
    r.per_bin.push_back(bc);
  }
  r.encoder_cost = r.decoder_cost + p.bias() * p.bias();
  return r;
}

/// Sample estimate of the decoder cost: draw from the source, quantize,
/// decode to the centroid, average the squared error.
inline MonteCarloEstimate monte_carlo_cost(const Partition& p, std::size_t n, std::uint64_t seed) {
  if (n == 0) throw DomainError("monte_carlo_cost needs at least one sample");
  const auto u = decoder_best_response(p).centroids;
  const auto& m = p.edges();
  std::mt19937_64 rng(seed);
  const SourceModel& src = p.source();
  std::exponential_distribution<double> expo(src.rate());
  std::normal_distribution<double> gauss(src.mean(), src.stddev());

  double mean = 0.0, m2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = src.is_exponential() ? expo(rng) : gauss(rng);
    const auto bin = static_cast<std::size_t>(std::upper_bound(m.begin() + 1, m.end() - 1, x) -
                                              (m.begin() + 1));
    const double err = x - u[bin];
    const double sq = err * err;
    const double delta = sq - mean;
    mean += delta / static_cast<double>(i + 1);
    m2 += delta * (sq - mean);
  }
  const double var = n > 1 ? m2 / static_cast<double>(n - 1) : 0.0;
  return {mean, std::sqrt(var / static_cast<double>(n))};
}

}  // namespace cheaptalk
