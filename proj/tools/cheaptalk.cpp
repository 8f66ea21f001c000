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

// cheaptalk: solve, sweep, verify and iterate cheap-talk quantizer equilibria.
//
// Exit status: 0 success, 1 usage or parse error, 2 no equilibrium / bin
// collapse / non-convergence, 3 verification failure.

#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cheaptalk/dynamics.hpp"
#include "cheaptalk/equilibrium.hpp"
#include "cheaptalk/errors.hpp"
#include "cheaptalk/exp_solver.hpp"
#include "cheaptalk/gauss_solver.hpp"
#include "cheaptalk/sources.hpp"
#include "result_io.hpp"

namespace ct = cheaptalk;
using nlohmann::json;

namespace {

enum Exit { kOk = 0, kUsage = 1, kNoEquilibrium = 2, kVerifyFailed = 3 };

// Far above anything the solvers resolve; keeps allocations sane.
constexpr std::size_t kMaxBins = 1000000;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SourceArgs {
  std::string kind = "exp";
  double rate = 1.0;
  double mean = 0.0;
  double stddev = 1.0;

  void add(CLI::App* app) {
    app->add_option("--source", kind, "Source family")
        ->check(CLI::IsMember({"exp", "gauss"}))
        ->capture_default_str();
    app->add_option("--rate", rate, "Exponential rate")->capture_default_str();
    app->add_option("--mean", mean, "Gaussian mean")->capture_default_str();
    app->add_option("--std", stddev, "Gaussian standard deviation")->capture_default_str();
  }

  ct::SourceModel model() const {
    return kind == "exp" ? ct::SourceModel::exponential(rate)
                         : ct::SourceModel::gaussian(mean, stddev);
  }
};

struct Output {
  std::string path;

  void add(CLI::App* app) { app->add_option("--out", path, "Write to PATH instead of stdout"); }

  void write(const std::string& text) const {
    if (path.empty()) {
      std::cout << text;
      return;
    }
    std::ofstream f(path);
    if (!f) throw UsageError("cannot open " + path + " for writing");
    f << text;
  }
};

double elapsed_ms(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

// ---- solve ----------------------------------------------------------------

struct SolveArgs {
  SourceArgs src;
  Output out;
  double bias = 0.0;
  std::size_t bins = 2;
  std::string solver = "auto";
  std::size_t depth = 0;
  std::size_t margin = ct::gaussian::kDefaultMargin;
  double damping = ct::gaussian::kDefaultDamping;
  std::size_t max_iter = ct::gaussian::kDefaultMaxIter;
  double iter_tol = ct::gaussian::kDefaultIterTol;
  double tol = ct::kDefaultCertifyTol;
};

int run_solve(const SolveArgs& a) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto src = a.src.model();
  const double b = a.bias;
  std::string solver = a.solver;
  if (solver == "auto") {
    if (src.is_exponential()) {
      solver = "closed-form";
    } else {
      solver = a.bins == 2 ? "two-bin" : "fixed-point";
    }
  }

  std::optional<ct::Partition> p;
  std::optional<ct::io::LadderInfo> ladder;
  std::string note;
  if (src.is_exponential()) {
    if (solver == "closed-form") {
      // Below the two-bin threshold no informative partition exists at all.
      if (a.bins >= 2) ct::exponential::solve_two_bin(src.rate(), b);
      p = ct::exponential::solve_n_bins(src.rate(), b, a.bins);
    } else if (solver == "two-bin") {
      p = ct::exponential::solve_two_bin(src.rate(), b);
    } else if (solver == "ladder") {
      if (!(b > 0.0)) throw ct::NoEquilibrium("an equal-length infinite equilibrium needs a positive bias");
      const std::size_t depth = a.depth ? a.depth : ct::exponential::kDefaultLadderDepth;
      auto lad = ct::exponential::infinite_equilibrium(src.rate(), b, depth);
      lad.edges.erase(lad.edges.begin());
      p = ct::Partition(src, b, lad.edges);
      ladder = ct::io::LadderInfo{1, true};
    } else {
      throw UsageError("solver '" + solver + "' does not apply to an exponential source");
    }
  } else {
    if (b == 0.0 && solver != "two-bin") note = "zero bias: classical quantizer, outside the strategic analysis";
    if (solver == "two-bin") {
      p = ct::gaussian::solve_two_bin_gauss(src.mean(), src.stddev(), b);
    } else if (solver == "fixed-point") {
      p = ct::gaussian::solve_n_bins_gauss(src.mean(), src.stddev(), b, a.bins, std::nullopt,
                                            a.damping, a.max_iter, a.iter_tol);
    } else if (solver == "ladder") {
      if (b == 0.0) throw ct::NoEquilibrium("an infinite ladder needs a nonzero bias");
      const std::size_t depth = a.depth ? a.depth : ct::gaussian::kDefaultLadderEdges;
      const auto start = ct::gaussian::default_ladder(src.mean(), src.stddev(), b, depth, a.margin);
      const auto res = ct::gaussian::iterate_map_T(start, src, b, a.damping, a.max_iter, a.iter_tol);
      if (!res.converged) throw ct::NonConvergence(res.iterations, "ladder iteration did not converge");
      p = ct::Partition(src, b, res.ladder.edges());
      ladder = ct::io::LadderInfo{a.margin, b > 0.0};
    } else {
      throw UsageError("solver '" + solver + "' does not apply to a gaussian source");
    }
  }

  const auto cert = ct::io::certify_document(*p, a.tol, ladder);
  const auto doc = ct::io::result_document(*p, solver, cert, elapsed_ms(t0), ladder, note);
  a.out.write(doc.dump(2) + "\n");
  if (!cert.verdict) {
    std::cerr << "certificate failed: max residual " << cert.max_abs_residual << "\n";
    return kVerifyFailed;
  }
  return kOk;
}

// ---- sweep ----------------------------------------------------------------

struct SweepArgs {
  SourceArgs src;
  Output out;
  std::string report = "max-bins";
  double bias_from = 0.0, bias_to = 0.0;
  std::size_t bias_steps = 0;
  double bias = 0.5;
  std::size_t bins_from = 1, bins_to = 0;
};

std::vector<double> bias_grid(const SweepArgs& a) {
  if (a.bias_steps == 0 || a.bias_from > a.bias_to) throw UsageError("empty bias grid");
  std::vector<double> g;
  if (a.bias_steps == 1) return {a.bias_from};
  for (std::size_t i = 0; i < a.bias_steps; ++i)
    g.push_back(a.bias_from + (a.bias_to - a.bias_from) * static_cast<double>(i) /
                                  static_cast<double>(a.bias_steps - 1));
  return g;
}

// Largest N for which the backward recursion produces an equilibrium,
// searching no further than one past the bin-count bound.
std::string max_bins_row(double rate, double b) {
  using ct::io::csv_number;
  std::ostringstream row;
  row << csv_number(rate) << ',' << csv_number(b) << ',';
  if (!(b < 0.0)) {
    row << ",,unbounded";
    return row.str();
  }
  const auto bound = ct::exponential::max_bins_negative_bias(rate, b);
  std::size_t found = 1;
  for (std::size_t n = 2; n <= bound + 1; ++n) {
    try {
      ct::exponential::backward_recursion(rate, b, n);
      found = n;
    } catch (const ct::BinCollapse&) {
      break;
    }
  }
  row << found << ',' << bound << ',' << (found > bound ? "bound_exceeded" : "ok");
  return row.str();
}

int run_sweep(const SweepArgs& a) {
  using ct::io::csv_list;
  using ct::io::csv_number;
  const auto src = a.src.model();
  std::ostringstream csv;

  auto guarded = [&](const std::string& prefix, std::size_t empty_cols, auto&& body) {
    try {
      csv << body() << '\n';
    } catch (const ct::Error& e) {
      csv << prefix << std::string(empty_cols, ',') << ",\"" << e.what() << "\"\n";
    }
  };

  if (a.report == "max-bins") {
    if (!src.is_exponential()) throw UsageError("max-bins sweeps need an exponential source");
    csv << "rate,bias,max_bins,bound,status\n";
    for (double b : bias_grid(a)) {
      const std::string prefix = csv_number(src.rate()) + ',' + csv_number(b);
      guarded(prefix, 2, [&] { return max_bins_row(src.rate(), b); });
    }
  } else if (a.report == "cost-ladder") {
    if (!src.is_exponential()) throw UsageError("cost-ladder sweeps need an exponential source");
    if (a.bins_to < a.bins_from || a.bins_from == 0) throw UsageError("empty bin-count grid");
    csv << "rate,bias,bins,decoder_cost,encoder_cost,excess_over_infinite,decoder_cost_infinite,"
           "max_abs_residual,verdict,edges,status\n";
    for (std::size_t n = a.bins_from; n <= a.bins_to; ++n) {
      const std::string prefix =
          csv_number(src.rate()) + ',' + csv_number(a.bias) + ',' + std::to_string(n);
      guarded(prefix, 7, [&] {
        const auto p = ct::exponential::solve_n_bins(src.rate(), a.bias, n);
        const auto cost = ct::decoder_cost(p);
        const auto cert = ct::certify(p, 1e-9);
        const bool positive = a.bias > 0.0;
        std::ostringstream row;
        row << prefix << ',' << csv_number(cost.decoder_cost) << ','
            << csv_number(cost.encoder_cost) << ','
            << (positive ? csv_number(ct::exponential::decoder_cost_excess(src.rate(), a.bias, n)) : "")
            << ','
            << (positive ? csv_number(ct::exponential::decoder_cost_infinite(src.rate(), a.bias)) : "")
            << ',' << csv_number(cert.max_abs_residual) << ',' << (cert.verdict ? "true" : "false")
            << ',' << csv_list(p.edges()) << ",ok";
        return row.str();
      });
    }
  } else if (a.report == "fixed-length") {
    if (!src.is_exponential()) throw UsageError("fixed-length sweeps need an exponential source");
    csv << "rate,bias,fixed_length,decoder_cost_infinite,status\n";
    for (double b : bias_grid(a)) {
      const std::string prefix = csv_number(src.rate()) + ',' + csv_number(b);
      guarded(prefix, 2, [&] {
        return prefix + ',' + csv_number(ct::exponential::fixed_point_length(src.rate(), b)) + ',' +
               csv_number(ct::exponential::decoder_cost_infinite(src.rate(), b)) + ",ok";
      });
    }
  } else if (a.report == "gauss-two-bin") {
    if (!src.is_gaussian()) throw UsageError("gauss-two-bin sweeps need a gaussian source");
    csv << "mean,std,bias,edge,normalized_edge,max_abs_residual,verdict,status\n";
    for (double b : bias_grid(a)) {
      const std::string prefix = csv_number(src.mean()) + ',' + csv_number(src.stddev()) + ',' + csv_number(b);
      guarded(prefix, 4, [&] {
        const auto p = ct::gaussian::solve_two_bin_gauss(src.mean(), src.stddev(), b);
        const auto cert = ct::certify(p, 1e-9);
        const double m1 = p.edges()[1];
        return prefix + ',' + csv_number(m1) + ',' + csv_number((m1 - src.mean()) / src.stddev()) +
               ',' + csv_number(cert.max_abs_residual) + ',' + (cert.verdict ? "true" : "false") +
               ",ok";
      });
    }
  } else {
    throw UsageError("unknown report " + a.report);
  }
  a.out.write(csv.str());
  return kOk;
}

// ---- verify ---------------------------------------------------------------

struct VerifyArgs {
  std::string input;
  std::uint64_t seed = 0;
  std::size_t samples = 1000000;
  double sigmas = 4.0;
};

int run_verify(const VerifyArgs& a) {
  json doc;
  {
    std::ifstream f(a.input);
    if (!f) throw ct::io::ParseError("cannot open " + a.input);
    try {
      f >> doc;
    } catch (const json::exception& e) {
      throw ct::io::ParseError(std::string("not valid JSON: ") + e.what());
    }
  }
  const auto parsed = ct::io::read_result(doc);
  const auto cert = ct::io::certify_document(parsed.partition, parsed.tolerance, parsed.ladder);
  const auto cost = ct::decoder_cost(parsed.partition);
  const auto mc = ct::monte_carlo_cost(parsed.partition, a.samples, a.seed);
  const double z = std::abs(mc.mean - cost.decoder_cost) / mc.standard_error;
  const bool mc_ok = z <= a.sigmas;
  json report = {{"certificate", ct::io::certificate_json(cert)},
                 {"decoder_cost", cost.decoder_cost},
                 {"encoder_cost", cost.encoder_cost},
                 {"monte_carlo", {{"mean", mc.mean},
                                  {"standard_error", mc.standard_error},
                                  {"samples", a.samples},
                                  {"seed", a.seed},
                                  {"z", z},
                                  {"agrees", mc_ok}}},
                 {"verdict", cert.verdict && mc_ok}};
  std::cout << report.dump(2) << "\n";
  if (!cert.verdict) std::cerr << "certificate failed: max residual " << cert.max_abs_residual << "\n";
  if (!mc_ok) std::cerr << "monte carlo estimate off by " << z << " standard errors\n";
  return cert.verdict && mc_ok ? kOk : kVerifyFailed;
}

// ---- dynamics -------------------------------------------------------------

struct DynamicsArgs {
  SourceArgs src;
  Output out;
  double bias = 0.0;
  std::size_t bins = 2;
  std::string method = "lloyd";
  std::string init = "random";
  double width = 1.0;
  std::optional<std::uint64_t> seed;
  std::size_t probe = 0;
  double damping = 0.5;
  std::size_t max_iter = 100000;
  double tol = 1e-10;
};

ct::Partition equal_init(const ct::SourceModel& src, double b, std::size_t bins, double width) {
  if (!(width > 0.0)) throw UsageError("--width must be positive");
  std::vector<double> m;
  for (std::size_t k = 1; k < bins; ++k) {
    const double k_d = static_cast<double>(k);
    m.push_back(src.is_exponential() ? k_d * width
                                     : src.mean() + (k_d - 0.5 * static_cast<double>(bins)) * width);
  }
  return ct::Partition(src, b, std::move(m));
}

json thinned_residuals(const std::vector<double>& history) {
  json out = json::array();
  for (std::size_t i = 0; i < history.size(); ++i)
    if (i + 1 <= ct::kFullTraceIterations || (i + 1) % ct::kTraceStride == 0 || i + 1 == history.size())
      out.push_back({{"iteration", i + 1}, {"residual", history[i]}});
  return out;
}

int run_dynamics(const DynamicsArgs& a) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto src = a.src.model();
  if (a.bins == 0) throw UsageError("--bins must be at least 1");
  ct::DynamicsOptions opt;
  opt.method = a.method == "lloyd" ? ct::Method::lloyd : ct::Method::fixed_point;
  opt.theta = opt.method == ct::Method::lloyd ? 1.0 : a.damping;
  opt.max_iter = a.max_iter;
  opt.tol = a.tol;
  json doc = {{"source", ct::io::source_json(src)}, {"bias", a.bias}, {"bins", a.bins}, {"method", a.method}};

  if (a.probe > 0) {
    if (!a.seed) throw UsageError("--seed is required for a basin probe");
    const auto s = ct::basin_probe(src, a.bias, a.bins, a.probe, *a.seed, opt);
    json limits = json::array();
    for (std::size_t i = 0; i < s.limits.size(); ++i)
      limits.push_back({{"interior_edges", s.limits[i]}, {"count", s.limit_counts[i]}});
    doc["seed"] = *a.seed;
    doc["probe"] = {{"runs", s.runs},
                    {"converged", s.converged},
                    {"collapsed", s.collapsed},
                    {"max_iter", s.exhausted},
                    {"converged_fraction", s.converged_fraction()},
                    {"distinct_limits", limits}};
  } else {
    std::optional<ct::Partition> init;
    if (a.init == "random") {
      if (!a.seed) throw UsageError("--seed is required for a random initial partition");
      init = ct::random_initial_partition(src, a.bias, a.bins, *a.seed);
      doc["seed"] = *a.seed;
    } else {
      init = equal_init(src, a.bias, a.bins, a.width);
    }
    const auto tr = ct::run_method(src, a.bias, *init, opt);
    doc["init"] = {{"kind", a.init}, {"edges", ct::io::numbers(init->edges())}};
    doc["outcome"] = ct::to_string(tr.outcome);
    doc["iterations"] = tr.iterations;
    if (tr.outcome == ct::Outcome::collapsed) doc["collapsed_bin"] = tr.collapsed_bin;
    doc["residual_history"] = thinned_residuals(tr.residual_history);
    if (tr.outcome == ct::Outcome::converged) {
      const auto& p = tr.final_partition();
      const auto cert = ct::certify(p, 10.0 * a.tol);
      doc["final"] = {{"edges", ct::io::numbers(p.edges())},
                      {"centroids", ct::io::numbers(ct::decoder_best_response(p).centroids)},
                      {"certificate", ct::io::certificate_json(cert)}};
    }
  }
  doc["meta"] = {{"tool_version", ct::io::kToolVersion}, {"runtime_ms", elapsed_ms(t0)}};
  a.out.write(doc.dump(2) + "\n");
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Equilibria of the quadratic cheap-talk quantizer game"};
  app.require_subcommand(1);
  app.set_version_flag("--version", ct::io::kToolVersion);

  SolveArgs solve;
  auto* s = app.add_subcommand("solve", "Compute and certify an equilibrium");
  solve.src.add(s);
  solve.out.add(s);
  s->add_option("--bias", solve.bias, "Encoder bias b")->required();
  s->add_option("--bins", solve.bins, "Number of bins N")
      ->check(CLI::Range(std::size_t{1}, kMaxBins))
      ->capture_default_str();
  s->add_option("--solver", solve.solver, "Solver")
      ->check(CLI::IsMember({"auto", "closed-form", "two-bin", "fixed-point", "ladder"}))
      ->capture_default_str();
  s->add_option("--depth", solve.depth, "Ladder edges K (default 64 exp, 60 gauss)");
  s->add_option("--margin", solve.margin, "Ladder edges excluded at the cut (gauss)")->capture_default_str();
  s->add_option("--damping", solve.damping, "Damping in (0, 1]")->capture_default_str();
  s->add_option("--max-iter", solve.max_iter, "Iteration limit")->capture_default_str();
  s->add_option("--iter-tol", solve.iter_tol, "Edge-change tolerance")->capture_default_str();
  s->add_option("--tol", solve.tol, "Certificate tolerance")->capture_default_str();

  SweepArgs sweep;
  auto* w = app.add_subcommand("sweep", "Tabulate solver outputs over a grid (CSV)");
  sweep.src.add(w);
  sweep.out.add(w);
  w->add_option("--report", sweep.report, "Table")
      ->check(CLI::IsMember({"max-bins", "cost-ladder", "fixed-length", "gauss-two-bin"}))
      ->capture_default_str();
  w->add_option("--bias-from", sweep.bias_from, "First bias");
  w->add_option("--bias-to", sweep.bias_to, "Last bias");
  w->add_option("--bias-steps", sweep.bias_steps, "Grid points, inclusive of both ends");
  w->add_option("--bias", sweep.bias, "Bias for cost-ladder")->capture_default_str();
  w->add_option("--bins-from", sweep.bins_from, "First N for cost-ladder")->capture_default_str();
  w->add_option("--bins-to", sweep.bins_to, "Last N for cost-ladder")->check(CLI::Range(std::size_t{1}, kMaxBins));

  VerifyArgs verify;
  auto* v = app.add_subcommand("verify", "Re-certify a result document and cross-check its cost");
  v->add_option("input", verify.input, "Result JSON")->required();
  v->add_option("--seed", verify.seed, "Monte Carlo seed")->required();
  v->add_option("--samples", verify.samples, "Monte Carlo samples")->capture_default_str();
  v->add_option("--sigmas", verify.sigmas, "Allowed standard errors")->capture_default_str();

  DynamicsArgs dyn;
  auto* d = app.add_subcommand("dynamics", "Run best-response dynamics");
  dyn.src.add(d);
  dyn.out.add(d);
  d->add_option("--bias", dyn.bias, "Encoder bias b")->required();
  d->add_option("--bins", dyn.bins, "Number of bins N")
      ->check(CLI::Range(std::size_t{1}, kMaxBins))
      ->capture_default_str();
  d->add_option("--method", dyn.method, "Dynamics")
      ->check(CLI::IsMember({"lloyd", "fixed-point"}))
      ->capture_default_str();
  d->add_option("--init", dyn.init, "Initial partition")
      ->check(CLI::IsMember({"random", "equal"}))
      ->capture_default_str();
  d->add_option("--width", dyn.width, "Bin width for --init equal")->capture_default_str();
  d->add_option("--seed", dyn.seed, "Seed for random starts");
  d->add_option("--probe", dyn.probe, "Run a basin probe with this many random starts")
      ->check(CLI::Range(std::size_t{1}, kMaxBins));
  d->add_option("--damping", dyn.damping, "Damping for fixed-point")->capture_default_str();
  d->add_option("--max-iter", dyn.max_iter, "Iteration limit")->capture_default_str();
  d->add_option("--tol", dyn.tol, "Stop when sup |m - T(m)| <= tol")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (*s) return run_solve(solve);
    if (*w) return run_sweep(sweep);
    if (*v) return run_verify(verify);
    if (*d) return run_dynamics(dyn);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const ct::io::ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kUsage;
  } catch (const ct::NoInformativeEquilibrium& e) {
    std::cerr << "no informative equilibrium: " << e.what() << "\n";
    return kNoEquilibrium;
  } catch (const ct::NoEquilibrium& e) {
    std::cerr << "no equilibrium: " << e.what() << "\n";
    return kNoEquilibrium;
  } catch (const ct::NonConvergence& e) {
    std::cerr << "no convergence: " << e.what() << "\n";
    return kNoEquilibrium;
  } catch (const ct::EdgeOrderingViolation& e) {
    std::cerr << "no convergence: " << e.what() << "\n";
    return kNoEquilibrium;
  } catch (const ct::DomainError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const ct::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kNoEquilibrium;
  }
  return kUsage;
}
