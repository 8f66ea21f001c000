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

// End-to-end acceptance checks. One PASS/FAIL line per criterion.
//
//   acceptance                 run every criterion
//   acceptance --criterion N   run criterion N only

#include <sys/wait.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cheaptalk/dynamics.hpp"
#include "cheaptalk/equilibrium.hpp"
#include "cheaptalk/exp_solver.hpp"
#include "cheaptalk/gauss_solver.hpp"
#include "cheaptalk/sources.hpp"
#include "cheaptalk/special_fn.hpp"

namespace ct = cheaptalk;
namespace ex = cheaptalk::exponential;
namespace ga = cheaptalk::gaussian;
namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

// Collects failed sub-checks; the first few are echoed in the summary line.
class Check {
 public:
  void expect(bool ok, const std::string& what) {
    ++count_;
    if (ok) return;
    ++failed_;
    if (failures_.size() < 3) failures_.push_back(what);
  }
  void note(const std::string& s) { notes_.push_back(s); }
  bool passed() const { return failed_ == 0; }

  std::string summary() const {
    std::ostringstream os;
    os << count_ - failed_ << "/" << count_ << " checks";
    for (const auto& n : notes_) os << "; " << n;
    for (const auto& f : failures_) os << "; FAILED " << f;
    return os.str();
  }

 private:
  std::size_t count_ = 0;
  std::size_t failed_ = 0;
  std::vector<std::string> failures_;
  std::vector<std::string> notes_;
};

std::string fmt(double x, int digits = 6) {
  std::ostringstream os;
  os.precision(digits);
  os << x;
  return os.str();
}

double log_uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::exp(std::uniform_real_distribution<double>(std::log(lo), std::log(hi))(rng));
}

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

bool lengths_increasing(const ct::Partition& p) {
  const auto l = p.lengths();
  for (std::size_t k = 1; k < l.size(); ++k)
    if (!(l[k - 1] < l[k])) return false;
  return true;
}

double sup_distance(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) return ct::kInf;
  double d = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) d = std::max(d, std::abs(a[k] - b[k]));
  return d;
}

// ---- 1: Lambert identity --------------------------------------------------

void lambert_identity(Check& c) {
  auto check_branch = [&](const char* name, const std::vector<double>& xs, double (*w)(double)) {
    double worst = 0.0;
    for (double x : xs) {
      const double v = w(x);
      const double err = std::abs(v * std::exp(v) - x) / std::max(1.0, std::abs(x));
      worst = std::max(worst, err);
      c.expect(err <= 1e-12, std::string(name) + " at x=" + fmt(x, 17));
    }
    c.note(std::string(name) + " " + std::to_string(xs.size()) + " points, worst " + fmt(worst, 3));
  };
  // Offsets from -1/e; the smallest are far inside the 1e-9 band.
  auto near_branch = [](std::size_t n, double lo, double hi) {
    std::vector<double> xs;
    for (std::size_t i = 0; i < n; ++i) {
      const double t = std::log10(lo) + (std::log10(hi) - std::log10(lo)) * double(i) / double(n - 1);
      xs.push_back(-ct::kInvEHi + std::pow(10.0, t));
    }
    return xs;
  };

  auto w0 = near_branch(3000, 1e-16, 1e-9);
  for (double x : near_branch(3000, 1e-9, ct::kInvEHi)) w0.push_back(x);
  for (std::size_t i = 0; i < 4000; ++i) w0.push_back(std::pow(10.0, -300.0 + 600.0 * double(i) / 3999.0));
  check_branch("W0", w0, ct::lambert_w0);

  auto wm1 = near_branch(4000, 1e-16, 1e-9);
  for (double x : near_branch(3000, 1e-9, 0.3)) wm1.push_back(x);
  for (std::size_t i = 0; i < 3000; ++i) wm1.push_back(-std::pow(10.0, -300.0 + 298.9 * double(i) / 2999.0));
  check_branch("W-1", wm1, ct::lambert_w_minus1);
}

// ---- 2: moment oracles ----------------------------------------------------

void moment_oracles(Check& c) {
  std::mt19937_64 rng(20260101);
  auto compare = [&](const ct::SourceModel& src, double a, double b, double& worst_mean, double& worst_var) {
    try {
      const double m = ct::truncated_mean(src, a, b);
      const double v = ct::truncated_variance(src, a, b);
      const double q1 = ct::quadrature_moment(src, a, b, 1);
      const double q2 = ct::quadrature_moment(src, a, b, 2);
      const double dm = std::abs(m - q1);
      const double dv = std::abs(v - (q2 - q1 * q1));
      worst_mean = std::max(worst_mean, dm);
      worst_var = std::max(worst_var, dv);
      c.expect(dm <= 1e-8 && dv <= 1e-8, "interval [" + fmt(a, 17) + ", " + fmt(b, 17) + "]");
    } catch (const ct::Error& e) {
      c.expect(false, "interval [" + fmt(a, 17) + ", " + fmt(b, 17) + "]: " + e.what());
    }
  };

  double em = 0.0, ev = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const double rate = log_uniform(rng, 0.2, 5.0);
    const auto src = ct::SourceModel::exponential(rate);
    const double a = uniform(rng, 0.0, 10.0) / rate;
    const double b = i % 10 == 0 ? ct::kInf : a + log_uniform(rng, 1e-3, 20.0) / rate;
    compare(src, a, b, em, ev);
  }
  c.note("exponential worst mean " + fmt(em, 3) + " var " + fmt(ev, 3));

  double gm = 0.0, gv = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const double mu = uniform(rng, -3.0, 3.0);
    const double s = log_uniform(rng, 0.3, 3.0);
    const auto src = ct::SourceModel::gaussian(mu, s);
    double za = uniform(rng, -8.0, 8.0);
    double zb = uniform(rng, -8.0, 8.0);
    if (za > zb) std::swap(za, zb);
    if (zb - za < 1e-3) zb = za + 1e-3;
    double a = mu + s * za, b = mu + s * zb;
    if (i % 10 == 1) a = -ct::kInf;
    if (i % 10 == 2) b = ct::kInf;
    compare(src, a, b, gm, gv);
  }
  c.note("gaussian worst mean " + fmt(gm, 3) + " var " + fmt(gv, 3));
}

// ---- 3: existence thresholds ----------------------------------------------

bool solves(const std::function<ct::Partition()>& f) {
  try {
    return ct::certify(f()).verdict;
  } catch (const ct::NoEquilibrium&) {
    return false;
  }
}

void thresholds(Check& c) {
  for (double rate : {0.5, 1.0, 2.0}) {
    const double t2 = -1.0 / (2.0 * rate);
    const double t3 = t2 * (std::exp(1.0) - 2.0) / (std::exp(1.0) - 1.0);
    const std::string tag = "rate " + fmt(rate);
    c.expect(solves([&] { return ex::solve_two_bin(rate, t2 + 1e-6); }), tag + " two-bin above threshold");
    c.expect(!solves([&] { return ex::solve_two_bin(rate, t2 - 1e-6); }), tag + " two-bin below threshold");
    c.expect(solves([&] { return ex::solve_n_bins(rate, t3 + 1e-6, 3); }), tag + " three-bin above threshold");
    c.expect(!solves([&] { return ex::solve_n_bins(rate, t3 - 1e-6, 3); }), tag + " three-bin below threshold");
  }
}

// ---- 4: bin-count bound for negative bias ---------------------------------

void bin_bound(Check& c) {
  std::mt19937_64 rng(4242);
  std::size_t certified = 0, dyn_runs = 0;
  for (int i = 0; i < 100; ++i) {
    const double rate = log_uniform(rng, 0.2, 5.0);
    const double b = -log_uniform(rng, 0.02, 0.6) / rate;
    const std::size_t bound = ex::max_bins_negative_bias(rate, b);
    const auto src = ct::SourceModel::exponential(rate);
    const std::string tag = "rate " + fmt(rate) + " bias " + fmt(b);

    std::size_t found = 0;
    for (std::size_t n = 1; n <= bound + 2; ++n) {
      try {
        const auto p = ex::solve_n_bins(rate, b, n);
        if (!ct::certify(p).verdict) continue;
        ++certified;
        found = n;
        c.expect(n <= bound, tag + ": certified " + std::to_string(n) + " bins");
        c.expect(lengths_increasing(p), tag + ": lengths not increasing at N=" + std::to_string(n));
      } catch (const ct::NoEquilibrium&) {
      }
    }
    if (found >= 2) {
      try {
        ex::solve_two_bin(rate, b);
      } catch (const ct::NoEquilibrium&) {
        c.expect(false, tag + ": two-bin solver disagrees with recursion");
      }
    }

    ct::DynamicsOptions opt;
    opt.max_iter = 20000;
    for (ct::Method m : {ct::Method::lloyd, ct::Method::fixed_point}) {
      opt.method = m;
      for (std::size_t n : {found, bound + 1}) {
        if (n < 2) continue;
        const auto init = ct::random_initial_partition(src, b, n, ct::init_seed(99, std::size_t(i)));
        const auto tr = ct::run_method(src, b, init, opt);
        ++dyn_runs;
        if (tr.outcome != ct::Outcome::converged) continue;
        const auto& p = tr.final_partition();
        if (!ct::certify(p).verdict) continue;
        c.expect(p.bins() <= bound, tag + ": dynamics certified " + std::to_string(p.bins()) + " bins");
        c.expect(lengths_increasing(p), tag + ": dynamics lengths not increasing");
      }
    }
  }
  c.note(std::to_string(certified) + " certified partitions, " + std::to_string(dyn_runs) + " dynamics runs");
}

// ---- 5: backward recursion ------------------------------------------------

void backward_recursion(Check& c) {
  const double rate = 1.0;
  std::size_t ties = 0;
  for (double b : {0.1, 0.5, 2.0}) {
    const double cap = 2.0 / rate + 2.0 * b;
    for (std::size_t n = 1; n <= 50; ++n) {
      const std::string tag = "b " + fmt(b) + " N " + std::to_string(n);
      try {
        const auto st = ex::backward_recursion(rate, b, n);
        const auto p = ex::partition_from_lengths(rate, b, st.lengths);
        c.expect(ct::certify(p, 1e-9).verdict, tag + " certificate");
        const auto& l = st.lengths;
        for (std::size_t k = 0; k < l.size(); ++k) {
          c.expect(l[k] > 2.0 * b && l[k] < cap, tag + " length outside (2b, 2/rate + 2b)");
          if (k + 1 == l.size()) continue;
          // Lengths can agree to the last bit; their offsets from the
          // fixed length still resolve the order.
          if (l[k] == l[k + 1]) ++ties;
          c.expect(l[k] < l[k + 1] || st.fixed_point_excess[k] < st.fixed_point_excess[k + 1],
                   tag + " lengths not increasing");
        }
        if (!l.empty()) c.expect(l.back() > 1.0 / rate + 2.0 * b && l.back() < cap, tag + " last finite length");
      } catch (const ct::Error& e) {
        c.expect(false, tag + ": " + e.what());
      }
    }
  }
  c.note(std::to_string(ties) + " adjacent length pairs equal in double, ordered by offset");
}

// ---- 6: cost ladder ---------------------------------------------------------

void cost_ladder(Check& c) {
  const double rate = 1.0, b = 0.5;
  const double inf_cost = ex::decoder_cost_infinite(rate, b);
  std::vector<double> excess;
  for (std::size_t n = 1; n <= 50; ++n) {
    const std::string tag = "N " + std::to_string(n);
    const auto p = ex::solve_n_bins(rate, b, n);
    const auto cost = ct::decoder_cost(p);
    const double e = ex::decoder_cost_excess(rate, b, n);
    excess.push_back(e);
    c.expect(std::abs(cost.encoder_cost - cost.decoder_cost - b * b) <= 1e-12, tag + " encoder minus decoder");
    c.expect(e > 0.0, tag + " not above the infinite-ladder cost");
    c.expect(cost.decoder_cost >= inf_cost, tag + " decoder cost below infinite ladder");
    c.expect(std::abs(cost.decoder_cost - inf_cost - e) <= 1e-13, tag + " excess disagrees with direct cost");
    if (n > 1) {
      c.expect(e < excess[n - 2], tag + " gap to previous not positive");
      c.expect(cost.decoder_cost <= inf_cost + excess[n - 2], tag + " cost increased");
    }
  }
  for (std::size_t n = 31; n < 50; ++n)
    c.expect(excess[n] < excess[n - 1], "gap did not shrink at N " + std::to_string(n + 1));
  c.note("J(1) - J(inf) " + fmt(excess.front()) + ", J(50) - J(inf) " + fmt(excess.back(), 4) +
         ", J(inf) " + fmt(inf_cost, 17));
}

// ---- 7: fixed length and equal-length ladder -------------------------------

void fixed_length(Check& c) {
  std::mt19937_64 rng(777);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const double rate = log_uniform(rng, 0.2, 5.0);
    const double b = log_uniform(rng, 0.01, 5.0);
    const std::string tag = "rate " + fmt(rate) + " bias " + fmt(b);
    const double cap = 2.0 / rate + 2.0 * b;
    c.expect(ex::psi(2.0 * b, rate, b) > 0.0, tag + " psi at 2b");
    c.expect(ex::psi(cap, rate, b) < 0.0, tag + " psi at 2/rate + 2b");
    const double l = ex::fixed_point_length(rate, b);
    c.expect(l > 2.0 * b && l <= cap, tag + " fixed length outside bracket");
    if (l * (1.0 + 1e-9) < cap) {
      c.expect(ex::psi(l * (1.0 - 1e-9), rate, b) > 0.0 && ex::psi(l * (1.0 + 1e-9), rate, b) < 0.0,
               tag + " no sign change at the fixed length");
    }
    const auto r = ex::ladder_residuals(ex::infinite_equilibrium(rate, b, 100), rate, b);
    double m = 0.0;
    for (double x : r) m = std::max(m, std::abs(x));
    worst = std::max(worst, m);
    c.expect(r.size() == 99 && m <= 1e-9, tag + " ladder residual " + fmt(m, 3));
  }
  c.note("worst ladder residual " + fmt(worst, 3));
}

// ---- 8: gaussian two-bin ----------------------------------------------------

void gauss_two_bin(Check& c) {
  std::size_t points = 0;
  for (double mu : {-2.0, -0.5, 0.0, 1.0, 3.0})
    for (double s : {0.3, 0.7, 1.0, 2.0, 5.0})
      for (double b : {-1.2, -0.3, 0.0, 0.4, 1.5}) {
        ++points;
        const std::string tag = "mean " + fmt(mu) + " std " + fmt(s) + " bias " + fmt(b);
        const auto p = ga::solve_two_bin_gauss(mu, s, b);
        c.expect(ct::certify(p, 1e-9).verdict, tag + " certificate");
        const double scaled = (p.edges()[1] - mu) / s;
        if (b == 0.0) {
          c.expect(scaled == 0.0, tag + " edge off the mean");
        } else {
          c.expect((scaled > 0.0) == (b > 0.0), tag + " edge on the wrong side");
        }
      }
  std::vector<double> grid;
  for (int i = -2000; i <= 2000; ++i) grid.push_back(i * 5e-3);
  const double floor = ga::f_derivative_floor_check(grid);
  c.expect(floor > 0.07, "derivative floor " + fmt(floor));

  const auto peak = ga::ratio_peak();
  c.expect(std::abs(peak.location - 0.9557) <= 1e-3, "peak location " + fmt(peak.location, 10) + " vs 0.9557");
  c.expect(std::abs(peak.value - 0.2908) <= 1e-3, "peak value " + fmt(peak.value, 10) + " vs 0.2908");
  c.note(std::to_string(points) + " grid points, derivative floor " + fmt(floor) + ", peak at " +
         fmt(peak.location, 10) + " value " + fmt(peak.value, 10));
}

// ---- 9: gaussian ladder -----------------------------------------------------

void gauss_ladder(Check& c) {
  const auto src = ct::SourceModel::gaussian(0.0, 1.0);
  for (double b : {0.3, 0.5}) {
    const std::string tag = "b " + fmt(b);
    try {
      const auto r = ga::iterate_map_T(ga::default_ladder(0.0, 1.0, b, 60, 5), src, b);
      c.expect(r.converged, tag + " did not converge");
      c.expect(r.max_abs_residual <= 1e-6, tag + " residual " + fmt(r.max_abs_residual, 3));
      c.expect(ga::ladder_box(0.0, 1.0, b).contains(r.ladder), tag + " outside the bounding box");

      const std::size_t certified = r.ladder.edge_count() - r.ladder.margin;
      double worst = 0.0;
      for (std::size_t k = certified - 6; k < certified - 1; ++k)
        worst = std::max(worst, std::abs(r.ladder.lengths[k] / (2.0 * b) - 1.0));
      c.expect(worst <= 0.01, tag + " boundary lengths off 2b by " + fmt(100.0 * worst, 3) + "%");

      const auto wide = ga::iterate_map_T(ga::default_ladder(0.0, 1.0, b, 120, 5), src, b);
      const auto e1 = r.ladder.edges(), e2 = wide.ladder.edges();
      double moved = 0.0;
      for (std::size_t k = 0; k < certified; ++k) moved = std::max(moved, std::abs(e1[k] - e2[k]));
      c.expect(wide.converged && moved <= 1e-6, tag + " doubling K moved edges by " + fmt(moved, 3));
      c.note(tag + ": " + std::to_string(r.iterations) + " iterations, residual " + fmt(r.max_abs_residual, 3) +
             ", boundary length excess " + fmt(100.0 * worst, 3) + "%, doubling K moved " + fmt(moved, 3));
    } catch (const ct::Error& e) {
      c.expect(false, tag + ": " + e.what());
    }
  }
}

// ---- 10: dynamics cross-validation -----------------------------------------

void dynamics_cross_validation(Check& c) {
  const auto src = ct::SourceModel::exponential(1.0);
  double worst = 0.0;
  for (std::size_t n = 2; n <= 8; ++n) {
    const auto ref = ex::solve_n_bins(1.0, 0.5, n).interior_edges();
    for (ct::Method m : {ct::Method::lloyd, ct::Method::fixed_point}) {
      ct::DynamicsOptions opt;
      opt.method = m;
      for (std::size_t i = 0; i < 20; ++i) {
        const auto init = ct::random_initial_partition(src, 0.5, n, ct::init_seed(10, i));
        const auto tr = ct::run_method(src, 0.5, init, opt);
        const std::string tag = std::string(m == ct::Method::lloyd ? "lloyd" : "fixed-point") + " N " +
                                std::to_string(n) + " seed " + std::to_string(i);
        if (tr.outcome != ct::Outcome::converged) {
          c.expect(false, tag + " " + ct::to_string(tr.outcome));
          continue;
        }
        const double d = sup_distance(tr.final_partition().interior_edges(), ref);
        worst = std::max(worst, d);
        c.expect(d <= 1e-7, tag + " off by " + fmt(d, 3));
      }
    }
  }
  std::size_t collapsed = 0;
  for (ct::Method m : {ct::Method::lloyd, ct::Method::fixed_point}) {
    ct::DynamicsOptions opt;
    opt.method = m;
    for (std::size_t i = 0; i < 20; ++i) {
      const auto init = ct::random_initial_partition(src, -0.4, 3, ct::init_seed(11, i));
      const auto tr = ct::run_method(src, -0.4, init, opt);
      collapsed += tr.outcome == ct::Outcome::collapsed;
      c.expect(tr.outcome == ct::Outcome::collapsed, "b -0.4 run " + std::to_string(i) + " " + ct::to_string(tr.outcome));
    }
  }
  c.note("worst distance " + fmt(worst, 3) + ", " + std::to_string(collapsed) + "/40 collapsed at b -0.4");
}

// ---- 11: Monte Carlo --------------------------------------------------------

void monte_carlo(Check& c) {
  std::mt19937_64 rng(1111);
  double worst = 0.0;
  for (int i = 0; i < 20; ++i) {
    std::optional<ct::Partition> p;
    if (i % 2 == 0) {
      const double rate = log_uniform(rng, 0.3, 3.0);
      const double b = uniform(rng, -0.15, 1.0) / rate;
      std::size_t n = 2 + rng() % 6;
      if (b < 0.0) n = std::min<std::size_t>(n, 2);
      p = ex::solve_n_bins(rate, b, n);
    } else {
      const double mu = uniform(rng, -2.0, 2.0), s = log_uniform(rng, 0.5, 3.0);
      const double b = uniform(rng, -0.3, 0.3) * s;
      p = ga::solve_n_bins_gauss(mu, s, b, 2 + rng() % 3);
    }
    const std::string tag = "partition " + std::to_string(i);
    if (!ct::certify(*p).verdict) {
      c.expect(false, tag + " not certified");
      continue;
    }
    const double exact = ct::decoder_cost(*p).decoder_cost;
    const auto mc = ct::monte_carlo_cost(*p, 1000000, 5000 + std::uint64_t(i));
    const double z = std::abs(mc.mean - exact) / mc.standard_error;
    worst = std::max(worst, z);
    c.expect(z <= 4.0, tag + " z " + fmt(z, 3));
  }
  c.note("largest |z| " + fmt(worst, 3));
}

// ---- 12: CLI contract -------------------------------------------------------

struct Run {
  int status;
  std::string out;
};

Run cli(const std::string& args) {
  const std::string cmd = std::string(CHEAPTALK_CLI) + " " + args + " 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return {-1, ""};
  std::string out;
  char buf[4096];
  while (std::size_t n = std::fread(buf, 1, sizeof buf, pipe)) out.append(buf, n);
  const int rc = pclose(pipe);
  return {WIFEXITED(rc) ? WEXITSTATUS(rc) : -1, out};
}

// (bias, max_bins) from a max-bins sweep.
std::vector<std::pair<double, int>> max_bins_rows(const std::string& csv) {
  std::vector<std::pair<double, int>> rows;
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string rate, bias, bins;
    std::getline(ls, rate, ',');
    std::getline(ls, bias, ',');
    std::getline(ls, bins, ',');
    rows.emplace_back(std::stod(bias), std::stoi(bins));
  }
  return rows;
}

void cli_contract(Check& c) {
  const fs::path dir = fs::temp_directory_path() / "cheaptalk_acceptance";
  fs::create_directories(dir);
  const std::string result = (dir / "result.json").string();
  const std::string perturbed = (dir / "perturbed.json").string();

  c.expect(cli("solve --source exp --rate 1 --bias 0.5 --bins 4 --out " + result).status == 0, "solve exit");
  c.expect(cli("verify " + result + " --seed 7").status == 0, "verify round trip exit");
  try {
    std::ifstream in(result);
    auto doc = json::parse(in);
    doc["equilibrium"]["edges"][2] = doc["equilibrium"]["edges"][2].get<double>() + 0.1;
    std::ofstream(perturbed) << doc.dump();
    c.expect(cli("verify " + perturbed + " --seed 7").status == 3, "perturbed verify exit");
  } catch (const json::exception& e) {
    c.expect(false, std::string("result document: ") + e.what());
  }
  c.expect(cli("solve --source exp --rate 1 --bias -0.6 --bins 2").status == 2, "two-bin non-existence exit");
  c.expect(cli("solve --source exp --rate 1 --bias -0.25 --bins 3").status == 2, "three-bin non-existence exit");

  const double t2 = -0.5;
  const double t3 = -0.5 * (std::exp(1.0) - 2.0) / (std::exp(1.0) - 1.0);
  const auto sweep = cli("sweep --report max-bins --rate 1 --bias-from -0.6 --bias-to -0.01 --bias-steps 5901");
  c.expect(sweep.status == 0, "sweep exit");
  const auto rows = max_bins_rows(sweep.out);
  c.expect(rows.size() == 5901, "sweep rows " + std::to_string(rows.size()));
  double first2 = ct::kInf, first3 = ct::kInf;
  int prev = 0;
  for (const auto& [b, n] : rows) {
    c.expect(n >= prev, "max_bins decreased at " + fmt(b));
    prev = n;
    if (n >= 2) first2 = std::min(first2, b);
    if (n >= 3) first3 = std::min(first3, b);
    const int expected = b <= t2 ? 1 : b <= t3 ? 2 : 3;
    c.expect(b > t3 + 0.01 ? n >= 3 : n == expected, "max_bins " + std::to_string(n) + " at " + fmt(b, 17));
  }
  c.expect(first2 > t2 && first2 - t2 <= 1.0001e-4, "first two-bin row " + fmt(first2, 10));
  c.expect(first3 > t3 && first3 - t3 <= 1.0001e-4, "first three-bin row " + fmt(first3, 10));
  // Straddle each threshold by 1e-6.
  for (double t : {t2, t3}) {
    const auto r = max_bins_rows(cli("sweep --report max-bins --rate 1 --bias-from " + fmt(t - 1e-6, 17) +
                                     " --bias-to " + fmt(t + 1e-6, 17) + " --bias-steps 2")
                                     .out);
    c.expect(r.size() == 2 && r[1].second == r[0].second + 1, "no jump across " + fmt(t, 10));
  }
  c.note("jumps at " + fmt(first2, 6) + " and " + fmt(first3, 6) + " on a 1e-4 grid");
  fs::remove_all(dir);
}

struct Criterion {
  const char* name;
  void (*run)(Check&);
};

const Criterion kCriteria[] = {
    {"Lambert identity", lambert_identity},
    {"moment oracles", moment_oracles},
    {"existence thresholds", thresholds},
    {"negative-bias bin bound", bin_bound},
    {"backward recursion", backward_recursion},
    {"cost ladder", cost_ladder},
    {"fixed length", fixed_length},
    {"gaussian two-bin", gauss_two_bin},
    {"gaussian ladder", gauss_ladder},
    {"dynamics cross-validation", dynamics_cross_validation},
    {"Monte Carlo", monte_carlo},
    {"CLI contract", cli_contract},
};

bool run_one(int id) {
  const auto& cr = kCriteria[id - 1];
  Check c;
  try {
    cr.run(c);
  } catch (const std::exception& e) {
    c.expect(false, std::string("exception: ") + e.what());
  }
  std::cout << "criterion " << id << " " << (c.passed() ? "PASS" : "FAIL") << " " << cr.name << ": "
            << c.summary() << std::endl;
  return c.passed();
}

}  // namespace

int main(int argc, char** argv) {
  constexpr int count = static_cast<int>(std::size(kCriteria));
  std::vector<int> ids;
  if (argc == 3 && std::string(argv[1]) == "--criterion") {
    const int id = std::atoi(argv[2]);
    if (id < 1 || id > count) {
      std::cerr << "criterion must be between 1 and " << count << "\n";
      return 2;
    }
    ids.push_back(id);
  } else if (argc == 1) {
    for (int i = 1; i <= count; ++i) ids.push_back(i);
  } else {
    std::cerr << "usage: acceptance [--criterion N]\n";
    return 2;
  }
  bool ok = true;
  for (int id : ids) ok = run_one(id) && ok;
  return ok ? 0 : 1;
}
