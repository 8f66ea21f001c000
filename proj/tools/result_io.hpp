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

// JSON and CSV encoding of solver results.

#pragma once

#include <cmath>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "cheaptalk/equilibrium.hpp"
#include "cheaptalk/sources.hpp"

namespace cheaptalk::io {

using nlohmann::json;

inline constexpr const char* kToolVersion = "1.0.0";

/// Raised for documents that do not parse into a partition.
class ParseError : public Error {
 public:
  using Error::Error;
};

inline json number(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return x;
}

inline json numbers(const std::vector<double>& xs) {
  json out = json::array();
  for (double x : xs) out.push_back(number(x));
  return out;
}

inline double read_number(const json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return kInf;
    if (s == "-inf") return -kInf;
  }
  throw ParseError("expected a number or \"inf\"/\"-inf\"");
}

inline json source_json(const SourceModel& src) {
  if (src.is_exponential()) return {{"kind", "exponential"}, {"rate", src.rate()}};
  return {{"kind", "gaussian"}, {"mean", src.mean()}, {"std", src.stddev()}};
}

inline SourceModel read_source(const json& j) {
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "exponential") return SourceModel::exponential(read_number(j.at("rate")));
  if (kind == "gaussian")
    return SourceModel::gaussian(read_number(j.at("mean")), read_number(j.at("std")));
  throw ParseError("unknown source kind: " + kind);
}

/// Edges excluded from certification next to a truncated ladder's cut.
struct LadderInfo {
  std::size_t margin;
  bool upper;  // the cut is at the upper end
};

/// Certificate of `p`, dropping `ladder->margin` residuals at the cut.
inline EquilibriumCertificate certify_document(const Partition& p, double tol,
                                               const std::optional<LadderInfo>& ladder) {
  auto cert = certify(p, tol);
  if (!ladder) return cert;
  auto& r = cert.residuals;
  const std::size_t drop = std::min(ladder->margin, r.size());
  if (ladder->upper) {
    r.erase(r.end() - static_cast<std::ptrdiff_t>(drop), r.end());
  } else {
    r.erase(r.begin(), r.begin() + static_cast<std::ptrdiff_t>(drop));
  }
  cert.max_abs_residual = 0.0;
  for (double x : r) cert.max_abs_residual = std::max(cert.max_abs_residual, std::abs(x));
  cert.verdict = cert.max_abs_residual <= tol;
  return cert;
}

inline json certificate_json(const EquilibriumCertificate& c) {
  return {{"residuals", c.residuals},
          {"max_abs_residual", c.max_abs_residual},
          {"tolerance", c.tolerance},
          {"verdict", c.verdict}};
}

inline json result_document(const Partition& p, const std::string& solver,
                            const EquilibriumCertificate& cert, double runtime_ms,
                            const std::optional<LadderInfo>& ladder = std::nullopt,
                            const std::string& note = {}) {
  const auto costs = decoder_cost(p);
  json meta = {{"tool_version", kToolVersion}, {"runtime_ms", runtime_ms}};
  if (ladder) meta["ladder"] = {{"margin", ladder->margin}, {"cut", ladder->upper ? "upper" : "lower"}};
  if (!note.empty()) meta["note"] = note;
  return {{"source", source_json(p.source())},
          {"bias", p.bias()},
          {"solver", solver},
          {"equilibrium",
           {{"edges", numbers(p.edges())},
            {"centroids", numbers(decoder_best_response(p).centroids)},
            {"lengths", numbers(p.lengths())},
            {"certificate", certificate_json(cert)}}},
          {"costs", {{"decoder", costs.decoder_cost}, {"encoder", costs.encoder_cost}}},
          {"meta", meta}};
}

struct ParsedResult {
  Partition partition;
  double tolerance;
  std::optional<LadderInfo> ladder;
};

inline ParsedResult read_result(const json& doc) {
  try {
    const auto src = read_source(doc.at("source"));
    const double b = read_number(doc.at("bias"));
    std::vector<double> edges;
    for (const auto& e : doc.at("equilibrium").at("edges")) edges.push_back(read_number(e));
    const double tol = read_number(doc.at("equilibrium").at("certificate").at("tolerance"));
    std::optional<LadderInfo> ladder;
    if (doc.contains("meta") && doc["meta"].contains("ladder")) {
      const auto& l = doc["meta"]["ladder"];
      ladder = LadderInfo{l.at("margin").get<std::size_t>(), l.at("cut").get<std::string>() == "upper"};
    }
    return {Partition(src, b, std::move(edges)), tol, ladder};
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed result document: ") + e.what());
  } catch (const DomainError& e) {
    throw ParseError(std::string("invalid result document: ") + e.what());
  }
}

/// Shortest-exact "%.17g" rendering used for every CSV cell.
inline std::string csv_number(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline std::string csv_list(const std::vector<double>& xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ';';
    out += csv_number(xs[i]);
  }
  return out;
}

}  // namespace cheaptalk::io
