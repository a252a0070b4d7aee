// Acceptance suite: one PASS/FAIL line per criterion. Exit status is nonzero
// when any hard gate fails; soft gates are reported only.

#include <chrono>
#include <cmath>
#include <cstring>
#include <iostream>
#include <random>
#include <sstream>
#include <string>

#include <fmt/format.h>

#include "broadbeam/config.hpp"
#include "broadbeam/conic_solver.hpp"
#include "broadbeam/hybrid.hpp"
#include "broadbeam/ideal_beampattern.hpp"
#include "broadbeam/outage.hpp"
#include "broadbeam/papr.hpp"
#include "broadbeam/synthesis.hpp"
#include "socp_oracle.hpp"

using namespace broadbeam;

namespace {

int hard_failures = 0;

void report(const std::string& id, bool ok, const std::string& detail, bool soft = false) {
  const char* tag = ok ? "PASS" : (soft ? "SOFT-FAIL" : "FAIL");
  std::cout << fmt::format("[{}] {}: {}", tag, id, detail) << std::endl;
  if (!ok && !soft) ++hard_failures;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Independent beampattern: |sum_m conj(w_m) exp(-j 2 pi D x m)|^2 by direct summation.
double pattern(const CVector& w, double spacing, double x) {
  cdouble acc = 0.0;
  for (Eigen::Index m = 0; m < w.size(); ++m)
    acc += std::conj(w[m]) * std::exp(cdouble(0.0, -2.0 * kPi * spacing * x * static_cast<double>(m)));
  return std::norm(acc) / w.squaredNorm();
}

double dense_min(const CVector& w, double spacing, double lo, double hi, int n) {
  double out = 1e300;
  for (int i = 0; i < n; ++i) out = std::min(out, pattern(w, spacing, lo + (hi - lo) * i / (n - 1)));
  return out;
}

PipelineConfig scaled(int antennas) {
  PipelineConfig c;
  c.antennas = antennas;
  return c;
}

struct Design {
  SynthesisReport report;
  SynthesisProblem problem;
  double g_min = 0.0, g_min_zc = 0.0, stop_max = 0.0, seconds = 0.0;
};

Design run_design(int antennas) {
  Design f;
  const auto c = scaled(antennas);
  f.problem = synthesis_problem(c);
  const auto t0 = std::chrono::steady_clock::now();
  f.report = run_algorithm1(f.problem, synthesis_options(c));
  f.seconds = seconds_since(t0);
  const auto& cfg = f.problem.cfg;
  // Pass band at 10x the optimization density, evaluated independently.
  const int n = 10 * static_cast<int>(f.problem.grid.size());
  f.g_min = dense_min(f.report.best_w1.weights(), cfg.spacing, cfg.pass_lo(), cfg.pass_hi(), n);
  f.g_min_zc = dense_min(zc_baseline(cfg).weights(), cfg.spacing, cfg.pass_lo(), cfg.pass_hi(), n);
  // Stop points: grid points at least delta_t away from the pass band.
  const double dt = f.report.best_delta_t;
  for (double x : f.problem.grid) {
    const double dist = std::max(cfg.pass_lo() - x, x - cfg.pass_hi());
    if (dist >= dt) f.stop_max = std::max(f.stop_max, pattern(f.report.best_w1.weights(), cfg.spacing, x));
  }
  return f;
}

void criterion_1() {
  const double sector = ideal_level(array_config(PipelineConfig{})).xi_star;
  PipelineConfig full;
  full.sector_lo_deg = -90.0;
  full.sector_hi_deg = 90.0;
  const double whole = ideal_level(array_config(full)).xi_star;
  report("1 ideal level", std::abs(sector - 2.0) <= 1e-12 && std::abs(whole - 1.0) <= 1e-12,
         fmt::format("xi*(60 deg sector) = {:.15f}, xi*(full sector) = {:.15f}, tol 1e-12", sector, whole));
}

bool criterion_2(const Design& f, int antennas, bool soft) {
  const double cap = f.problem.r_s * 1.001;
  const bool ok = f.g_min > 1.5 && f.g_min > f.g_min_zc && f.stop_max <= cap;
  report(fmt::format("2 pass-band floor and stop-band cap (M={}, {})", antennas, soft ? "soft gate" : "hard gate"), ok,
         fmt::format("g_min {:.4f} > 1.5, zc g_min {:.3g}, stop max {:.6g} <= {:.6g}, delta_t {:.4f}, {:.1f} s",
                     f.g_min, f.g_min_zc, f.stop_max, cap, f.report.best_delta_t, f.seconds),
         soft);
  return ok;
}

void criterion_3() {
  const auto cfg = array_config(PipelineConfig{});
  const CVector w = zc_baseline(cfg).weights();
  double worst = 0.0;
  for (int k = -32; k <= 31; ++k) worst = std::max(worst, std::abs(pattern(w, 0.5, k / (64 * 0.5)) - 1.0));
  report("3 ZC discrete-angle property", worst <= 1e-6,
         fmt::format("max |g(k/(MD)) - 1| = {:.3g} over k=-32..31, tol 1e-6", worst));
}

void criterion_4(const Design& f, int antennas) {
  const auto c = scaled(antennas);
  auto opts = synthesis_options(c);
  int budget = 0;
  for (const auto& e : f.report.trace) budget += e.iterations;
  opts.max_inner = std::max(opts.max_inner, budget);
  const auto t0 = std::chrono::steady_clock::now();
  const auto r = run_p4_random(f.problem, 10, 1, opts, {f.report.best_delta_t});
  const auto& cfg = f.problem.cfg;
  const double g = dense_min(r.best.weights(), cfg.spacing, cfg.pass_lo(), cfg.pass_hi(),
                             10 * static_cast<int>(f.problem.grid.size()));
  report(fmt::format("4 P4 random-init inferiority (M={})", antennas), g < f.g_min,
         fmt::format("best of 10 random P4 starts g_min {:.4f} < P3 pipeline {:.4f}, budget {} alternations per "
                     "start, {:.1f} s",
                     g, f.g_min, opts.max_inner, seconds_since(t0)));
}

void criteria_5_to_7(const Design& f) {
  const PipelineConfig c;
  const CVector w1 = f.report.best_w1.weights();
  const auto s = enumerate_flips(w1, c.q, c.papr_seed);
  std::ostringstream table;
  write_candidates_csv(table, s);
  std::istringstream is(table.str());
  std::string line;
  std::getline(is, line);
  int rows = 0;
  double min_table = 1e300;
  while (std::getline(is, line)) {
    ++rows;
    min_table = std::min(min_table, std::stod(line.substr(line.rfind(',') + 1)));
  }
  const double orig = papr(w1);
  const double reduction = 1.0 - s.best.papr / orig;
  report("5 PAPR candidates", rows == 257 && min_table <= orig && reduction >= 0.25,
         fmt::format("{} rows, min PAPR {:.4f} <= PAPR(w1) {:.4f}, reduction {:.1f}% >= 25% (56% soft target, "
                     "not gated)",
                     rows, min_table, orig, 100 * reduction));

  // Autocorrelation r[k] = sum_m w_m conj(w_{m+k}) and beampattern at 512 frequencies.
  auto autocorr = [](const CVector& w) {
    CVector r = CVector::Zero(w.size());
    for (Eigen::Index k = 0; k < w.size(); ++k)
      for (Eigen::Index m = 0; m + k < w.size(); ++m) r[k] += w[m] * std::conj(w[m + k]);
    return r;
  };
  const CVector r0 = autocorr(w1);
  std::vector<double> g0(512);
  double peak = 0.0;
  for (int k = 0; k < 512; ++k) {
    g0[k] = pattern(w1, 0.5, -1.0 + 2.0 * k / 512.0);
    peak = std::max(peak, g0[k]);
  }
  double worst_r = 0.0, worst_g = 0.0;
  for (const auto& cand : s.candidates) {
    worst_r = std::max(worst_r, (autocorr(cand.weights) - r0).cwiseAbs().maxCoeff());
    for (int k = 0; k < 512; ++k)
      worst_g = std::max(worst_g, std::abs(pattern(cand.weights, 0.5, -1.0 + 2.0 * k / 512.0) - g0[k]) / peak);
  }
  report("6 same-beampattern invariance", worst_r <= 1e-6 && worst_g <= 1e-6,
         fmt::format("original and {} candidates, max autocorrelation error {:.3g}, max beampattern error {:.3g} relative to "
                     "the peak, tol 1e-6",
                     s.candidates.size(), worst_r, worst_g));

  const CVector w2 = s.best.weights;
  double err = 0.0, modulus = 0.0;
  for (int n : {2, 4, 8}) {
    const auto h = decompose(w2, n);
    err = std::max(err, (h.analog * h.baseband - w2).cwiseAbs().maxCoeff());
    modulus = std::max(modulus, (h.analog.cwiseAbs().array() - 1.0).abs().maxCoeff());
  }
  report("7 hybrid exactness", err <= 1e-9 && modulus <= 1e-12,
         fmt::format("N_RF in {{2,4,8}}: max reconstruction error {:.3g} <= 1e-9, max ||a|-1| {:.3g} <= 1e-12", err,
                     modulus));
}

void criterion_8() {
  const auto cfg = make_array_config(16, 0.5, {-kPi / 2, kPi / 2}, {deg2rad(-30), deg2rad(30)});
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> g;
  const PASpec cases[] = {
      dirac_pas(deg2rad(12.0)),
      uniform_pas(deg2rad(-30), deg2rad(30)),
      uniform_pas(deg2rad(-5), deg2rad(20)),
      uniform_pas(deg2rad(-20), deg2rad(-17)),
      tabulated_pas(-kPi / 2, kPi / 2, [](double t) { return std::cos(t); }),  // flat in x: near i.i.d.
  };
  bool ok = true;
  std::string detail;
  int idx = 0;
  for (const auto& pas : cases) {
    CVector w(16);
    for (auto& x : w) x = {g(rng), g(rng)};
    w /= w.norm();
    const auto r = covariance(pas, cfg, 20001);
    const double q = effective_gain(w, r);
    // Power for a 20% outage keeps the binomial test informative.
    const OutageSpec spec{1.0, 0.2, min_power_for_gain(q, OutageSpec{1.0, 0.2, 1.0})};
    const double p = outage_closed_form(q, spec);
    const auto mc = outage_monte_carlo(w, r, spec, 100000, 100 + idx);
    const double sigma = std::sqrt(p * (1 - p) / 100000.0);
    const double z = std::abs(mc.estimate - p) / sigma;
    ok = ok && z <= 3.0;
    detail += fmt::format("{}pair {}: closed {:.4f} mc {:.4f} z {:.2f}", idx ? "; " : "", idx, p, mc.estimate, z);
    ++idx;
  }
  report("8 outage oracle agreement", ok, detail + " (|z| <= 3, 1e5 trials)");
}

void criterion_9() {
  const auto cfg = array_config(PipelineConfig{});
  std::mt19937_64 rng(9);
  std::normal_distribution<double> g;
  double worst_pass = 0.0, worst_full = 0.0;
  const int n = 20001;
  for (int t = 0; t < 20; ++t) {
    CVector w(64);
    for (auto& x : w) x = {g(rng), g(rng)};
    w /= w.norm();
    // Trapezoid in x, independent of the library quadrature.
    auto integral = [&](double lo, double hi) {
      const double h = (hi - lo) / (n - 1);
      double acc = 0.0;
      for (int i = 0; i < n; ++i) acc += (i == 0 || i == n - 1 ? 0.5 : 1.0) * pattern(w, 0.5, lo + i * h);
      return acc * h;
    };
    worst_pass = std::max(worst_pass, integral(cfg.pass_lo(), cfg.pass_hi()));
    worst_full = std::max(worst_full, std::abs(integral(-1.0, 1.0) - 2.0));
  }
  report("9 Parseval suite", worst_pass <= 2.0 + 1e-6 && worst_full <= 1e-3,
         fmt::format("20 unit-norm beamformers: max pass integral {:.6f} <= 1/D + 1e-6, max |full - 1/D| {:.3g} <= "
                     "1e-3",
                     worst_pass, worst_full));
}

double cone_violation(conic::ConeKind kind, const Eigen::VectorXd& u, bool dual) {
  using conic::ConeKind;
  const auto k = u.size();
  if (kind == ConeKind::nonneg) return std::max(0.0, -u.minCoeff());
  if (kind == ConeKind::soc) return std::max(0.0, u.tail(k - 1).norm() - u[0]);
  const double a = std::max(0.0, u[0]), b = std::max(0.0, u[1]);
  const double cap = (dual ? 2.0 : 1.0) * std::sqrt(a * b);
  return std::max({0.0, -u[0], -u[1], u.tail(k - 2).norm() - cap});
}

void criterion_10() {
  std::mt19937_64 rng(10);
  std::uniform_int_distribution<int> dim(2, 10), cones(2, 6);
  double worst_obj = 0.0, worst_kkt = 0.0;
  int optimal = 0;
  for (int t = 0; t < 50; ++t) {
    const int n = dim(rng);
    auto [p, x0] = oracle::random_program(rng, n, cones(rng));
    const auto sol = conic::solve(p);
    if (sol.status != conic::SolveStatus::optimal) continue;
    ++optimal;
    const Eigen::VectorXd ref = oracle::barrier_solve(p, x0);
    worst_obj = std::max(worst_obj, std::abs(sol.primal_objective - p.objective().dot(ref)));
    // KKT: primal and dual cone membership, stationarity, complementarity.
    Eigen::VectorXd stat = p.objective();
    double comp = 0.0, prim = 0.0, dual = 0.0;
    for (std::size_t i = 0; i < p.constraints().size(); ++i) {
      const auto& con = p.constraints()[i];
      const Eigen::VectorXd u = con.rows * sol.primal + con.offset;
      const Eigen::VectorXd& y = sol.dual[i];
      prim = std::max(prim, cone_violation(con.kind, u, false));
      dual = std::max(dual, cone_violation(con.kind, y, true));
      stat -= con.rows.transpose() * y;
      comp += u.dot(y);
    }
    const double obj = std::abs(sol.primal_objective);
    worst_kkt = std::max({worst_kkt, prim, dual, stat.lpNorm<Eigen::Infinity>() / (1.0 + p.objective().lpNorm<Eigen::Infinity>()),
                          std::abs(comp) / (1.0 + obj)});
  }
  report("10 conic solver", optimal == 50 && worst_obj <= 1e-4 && worst_kkt <= 1e-6,
         fmt::format("{}/50 optimal, max |obj - oracle| {:.3g} <= 1e-4, max KKT residual {:.3g} <= 1e-6", optimal,
                     worst_obj, worst_kkt));
}

void criterion_11(const SynthesisReport& r8, const SynthesisReport& r32) {
  double worst = -1e300;
  std::size_t steps = 0;
  for (const auto* r : {&r8, &r32})
    for (const auto& e : r->trace)
      for (std::size_t k = 1; k < e.sigma_trace.size(); ++k) {
        worst = std::max(worst, e.sigma_trace[k] - e.sigma_trace[k - 1]);
        ++steps;
      }
  report("11 multiconvex monotonicity", worst <= 1e-7,
         fmt::format("M=8 and M=32, all delta_t: {} steps, largest sigma increase {:.3g} <= 1e-7", steps, worst));
}

}  // namespace

int main(int argc, char** argv) {
  bool full = false;
  for (int i = 1; i < argc; ++i)
    if (std::strcmp(argv[i], "--full") == 0) full = true;

  criterion_1();
  const Design f32 = run_design(32);
  criterion_2(f32, 32, false);
  const Design f64 = run_design(64);
  criterion_2(f64, 64, true);
  criterion_3();
  criterion_4(f32, 32);
  if (full) criterion_4(f64, 64);
  criteria_5_to_7(f64);
  criterion_8();
  criterion_9();
  criterion_10();
  const auto r8 = run_algorithm1(synthesis_problem(scaled(8)), synthesis_options(scaled(8)));
  criterion_11(r8, f32.report);

  std::cout << (hard_failures == 0 ? "acceptance: all hard gates passed" : "acceptance: hard gate failures")
            << std::endl;
  return hard_failures == 0 ? 0 : 1;
}
