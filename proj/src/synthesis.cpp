#include "broadbeam/synthesis.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <future>
#include <limits>
#include <numeric>
#include <optional>
#include <random>

namespace broadbeam {

using Region = SpatialFrequencyBand::Region;
using conic::ConeProgram;
using conic::Matrix;
using conic::Vector;

namespace {

using Rows2 = Eigen::Matrix<double, 2, Eigen::Dynamic>;

// Real embedding: w -> (Re w_0, Im w_0, Re w_1, ...).
Vector embed(const CVector& w) {
  Vector out(2 * w.size());
  for (Eigen::Index m = 0; m < w.size(); ++m) {
    out[2 * m] = w[m].real();
    out[2 * m + 1] = w[m].imag();
  }
  return out;
}

CVector unembed(const Vector& v) {
  CVector out(v.size() / 2);
  for (Eigen::Index m = 0; m < out.size(); ++m) out[m] = {v[2 * m], v[2 * m + 1]};
  return out;
}

// (Re, Im) of w^H a(x) as a linear map of the embedded w.
Rows2 response_rows(int antennas, double spacing, double x) {
  Rows2 a(2, 2 * antennas);
  const double phi = 2.0 * kPi * spacing * x;
  for (int m = 0; m < antennas; ++m) {
    const double c = std::cos(phi * m), s = std::sin(phi * m);
    a(0, 2 * m) = c;
    a(0, 2 * m + 1) = -s;
    a(1, 2 * m) = -s;
    a(1, 2 * m + 1) = -c;
  }
  return a;
}

cdouble response(const CVector& w, double spacing, double x) {
  const cdouble z = std::polar(1.0, -2.0 * kPi * spacing * x);
  cdouble acc = 0.0;
  for (Eigen::Index m = w.size() - 1; m >= 0; --m) acc = acc * z + std::conj(w[m]);
  return acc;
}

struct GridRows {
  std::vector<Rows2> pass;
  std::vector<Rows2> stop;
};

GridRows grid_rows(const SynthesisProblem& p, double delta_t) {
  GridRows g;
  for (double x : p.points(delta_t, Region::pass)) g.pass.push_back(response_rows(p.cfg.antennas, p.cfg.spacing, x));
  for (double x : p.points(delta_t, Region::stop)) g.stop.push_back(response_rows(p.cfg.antennas, p.cfg.spacing, x));
  return g;
}

// Stop caps ||A (fixed + V)|| <= sqrt(r_s) and ||fixed + V|| <= 1 on the
// leading 2M variables.
void add_common_caps(ConeProgram& prog, const GridRows& g, const Vector& fixed, double r_s) {
  const Eigen::Index n = prog.dimension();
  const Eigen::Index nw = fixed.size();
  for (const auto& a : g.stop) {
    Matrix rows = Matrix::Zero(3, n);
    rows.block(1, 0, 2, nw) = a;
    Vector off(3);
    off[0] = std::sqrt(r_s);
    off.tail(2) = a * fixed;
    prog.add_soc(std::move(rows), std::move(off));
  }
  Matrix ball = Matrix::Zero(nw + 1, n);
  ball.block(1, 0, nw, nw) = Matrix::Identity(nw, nw);
  Vector off(nw + 1);
  off[0] = 1.0;
  off.tail(nw) = fixed;
  prog.add_soc(std::move(ball), std::move(off));
}

// Rotated-cone lower bound u_i^2 <= 4 Re{(F^H a)(V^H a)^*} for every pass point,
// with u_i stored at column u0 + i.
void add_lower_bounds(ConeProgram& prog, const GridRows& g, const Vector& fixed, Eigen::Index u0) {
  const Eigen::Index n = prog.dimension();
  const Eigen::Index nw = fixed.size();
  for (std::size_t i = 0; i < g.pass.size(); ++i) {
    const auto& a = g.pass[i];
    const Eigen::Vector2d pf = a * fixed;
    Matrix rows = Matrix::Zero(3, n);
    rows.block(0, 0, 1, nw) = 4.0 * pf.transpose() * a;
    rows(2, u0 + static_cast<Eigen::Index>(i)) = 1.0;
    Vector off(3);
    off << 0.0, 1.0, 0.0;
    prog.add_rotated_soc(std::move(rows), std::move(off));
  }
}

conic::ConeSolution checked_solve(const ConeProgram& prog, const SynthesisOptions& opts, const char* stage,
                                  const SplitIterate& last) {
  auto sol = conic::solve(prog, opts.solver);
  if (sol.status != conic::SolveStatus::optimal)
    throw SynthesisError(std::string(stage) + ": subproblem " + conic::to_string(sol.status), last);
  return sol;
}

double max_pass_deviation(const CVector& w, const SynthesisProblem& p, double delta_t) {
  const double target = std::sqrt(p.xi_star);
  double worst = 0.0;
  for (double x : p.points(delta_t, Region::pass))
    worst = std::max(worst, std::abs(std::abs(response(w, p.cfg.spacing, x)) - target));
  return worst;
}

double min_pass_magnitude(const CVector& w, const SynthesisProblem& p, double delta_t) {
  double lo = std::numeric_limits<double>::infinity();
  for (double x : p.points(delta_t, Region::pass)) lo = std::min(lo, std::abs(response(w, p.cfg.spacing, x)));
  return lo;
}

// w = w11 + w12 with w11 - w12 a small chirp. The even split is a fixed
// point of the alternation, so the blocks are pulled apart slightly.
SplitIterate split(const CVector& w, double spread, double sigma) {
  const Eigen::Index M = w.size();
  CVector d(M);
  for (Eigen::Index m = 0; m < M; ++m) d[m] = std::polar(1.0, 2.0 * kPi * 0.6180339887498949 * double(m * m));
  d *= 0.5 * spread * w.norm() / std::sqrt(static_cast<double>(M));
  return {w / 2.0 + d, w / 2.0 - d, sigma};
}

}  // namespace

std::vector<double> SynthesisProblem::points(double delta_t, Region region) const {
  const auto b = band(delta_t);
  std::vector<double> out;
  for (double x : grid)
    if (b.classify(x) == region) out.push_back(x);
  return out;
}

std::vector<double> SynthesisProblem::delta_t_schedule() const {
  if (delta_t_max <= 0.0) return {0.0};
  std::vector<double> out;
  for (int k = 0;; ++k) {
    const double d = delta_t_max - k * delta_t_step;
    if (d <= delta_t_step * 1e-9) break;
    out.push_back(d);
  }
  return out;
}

double SynthesisProblem::grid_step() const {
  return grid.size() > 1 ? (grid.back() - grid.front()) / static_cast<double>(grid.size() - 1) : 0.0;
}

SynthesisProblem build_problem(const ArrayConfig& cfg, double r_s_ratio, int grid_density, double delta_t_max,
                               double delta_t_step) {
  validate(cfg);
  if (!(r_s_ratio > 0.0 && r_s_ratio < 1.0)) throw std::invalid_argument("r_s_ratio must lie in (0, 1)");
  if (grid_density < 2) throw std::invalid_argument("grid_density must be at least 2");
  SynthesisProblem p;
  p.cfg = cfg;
  p.ideal = ideal_level(cfg);
  p.xi_star = p.ideal.xi_star;
  p.r_s = p.xi_star * r_s_ratio;
  const int count = grid_density * cfg.antennas;
  if (count < cfg.antennas) throw std::invalid_argument("grid too coarse");
  p.grid = linspace(cfg.x_lo(), cfg.x_hi(), count);
  if (cfg.full_sector()) {
    p.delta_t_max = 0.0;
    p.delta_t_step = 0.0;
  } else {
    if (!(delta_t_max > 0.0)) throw std::invalid_argument("delta_t_max must be positive");
    if (!(delta_t_step > 0.0 && delta_t_step <= delta_t_max))
      throw std::invalid_argument("delta_t_step must lie in (0, delta_t_max]");
    p.delta_t_max = delta_t_max;
    p.delta_t_step = delta_t_step;
  }
  return p;
}

InitResult initialize_raw(const SynthesisProblem& p, double delta_t, const SynthesisOptions& opts) {
  const int M = p.cfg.antennas;
  const Eigen::Index nw = 2 * M, n = nw + 1, isig = nw;
  const GridRows g = grid_rows(p, delta_t);
  Vector c = Vector::Zero(n);
  c[isig] = 1.0;
  ConeProgram prog(c);
  // |w^H a(x) - sqrt(xi) e^{-j pi D x (M - 1)}| <= sigma: zero phase about the array centre.
  const auto pass = p.points(delta_t, Region::pass);
  for (std::size_t i = 0; i < pass.size(); ++i) {
    const cdouble target = std::polar(std::sqrt(p.xi_star), -kPi * p.cfg.spacing * pass[i] * (M - 1));
    Matrix rows = Matrix::Zero(3, n);
    rows(0, isig) = 1.0;
    rows.block(1, 0, 2, nw) = g.pass[i];
    Vector off(3);
    off << 0.0, -target.real(), -target.imag();
    prog.add_soc(std::move(rows), std::move(off));
  }
  add_common_caps(prog, g, Vector::Zero(nw), p.r_s);
  SplitIterate none{CVector::Zero(M), CVector::Zero(M), 0.0};
  const auto sol = checked_solve(prog, opts, "initialize", none);
  return {unembed(sol.primal.head(nw)), sol.primal[isig]};
}

Beamformer initialize(const SynthesisProblem& p, double delta_t, const SynthesisOptions& opts) {
  return Beamformer::normalized(initialize_raw(p, delta_t, opts).raw);
}

SplitIterate alternate_once(const SynthesisProblem& p, double delta_t, const SplitIterate& it, FixedBlock fixed,
                            const SynthesisOptions& opts) {
  const int M = p.cfg.antennas;
  const GridRows g = grid_rows(p, delta_t);
  const auto P = static_cast<Eigen::Index>(g.pass.size());
  const Eigen::Index nw = 2 * M, isig = nw, u0 = nw + 1, n = nw + 1 + P;
  const Vector f = embed(fixed == FixedBlock::first ? it.w11 : it.w12);
  const double root_xi = std::sqrt(p.xi_star);

  Vector c = Vector::Zero(n);
  c[isig] = 1.0;
  ConeProgram prog(c);
  // |(F + V)^H a| <= sigma + sqrt(xi)
  for (const auto& a : g.pass) {
    Matrix rows = Matrix::Zero(3, n);
    rows(0, isig) = 1.0;
    rows.block(1, 0, 2, nw) = a;
    Vector off(3);
    off[0] = root_xi;
    off.tail(2) = a * f;
    prog.add_soc(std::move(rows), std::move(off));
  }
  // u_i >= sqrt(xi) - sigma, u_i >= 0
  if (P > 0) {
    Matrix rows = Matrix::Zero(2 * P, n);
    Vector off = Vector::Zero(2 * P);
    for (Eigen::Index i = 0; i < P; ++i) {
      rows(i, u0 + i) = 1.0;
      rows(i, isig) = 1.0;
      off[i] = -root_xi;
      rows(P + i, u0 + i) = 1.0;
    }
    prog.add_nonneg(std::move(rows), std::move(off));
  }
  add_lower_bounds(prog, g, f, u0);
  add_common_caps(prog, g, f, p.r_s);

  const auto sol = checked_solve(prog, opts, "alternate_once", it);
  SplitIterate next = it;
  (fixed == FixedBlock::first ? next.w12 : next.w11) = unembed(sol.primal.head(nw));
  next.sigma = sol.primal[isig];
  return next;
}

P3Result solve_p3(const SynthesisProblem& p, double delta_t, const SynthesisOptions& opts) {
  const InitResult init = initialize_raw(p, delta_t, opts);
  P3Result out;
  out.init_sigma = init.sigma;
  CVector best = init.raw;
  double best_sigma = max_pass_deviation(Beamformer::normalized(best).weights(), p, delta_t);
  SplitIterate it = split(init.raw, opts.split_spread, init.sigma);
  // Stop when a full sweep over both blocks gains less than inner_tol.
  double sweep_start = init.sigma;
  for (int k = 0; k < opts.max_inner; ++k) {
    it = alternate_once(p, delta_t, it, k % 2 == 0 ? FixedBlock::first : FixedBlock::second, opts);
    out.sigma_trace.push_back(it.sigma);
    ++out.iterations;
    const CVector w = it.sum();
    const double dev = max_pass_deviation(Beamformer::normalized(w).weights(), p, delta_t);
    if (dev < best_sigma) {
      best_sigma = dev;
      best = w;
    }
    if (k % 2 == 1) {
      if (sweep_start - it.sigma < opts.inner_tol) break;
      sweep_start = it.sigma;
    }
  }
  out.w = Beamformer::normalized(best);
  out.sigma = best_sigma;
  return out;
}

std::vector<double> dense_pass_grid(const SynthesisProblem& p, int eval_density) {
  const double lo = p.cfg.pass_lo(), hi = p.cfg.pass_hi();
  const double step = p.grid_step() / std::max(eval_density, 1);
  const int count = static_cast<int>(std::ceil((hi - lo) / step)) + 1;
  return linspace(lo, hi, std::max(count, 2));
}

double pass_band_min(const Beamformer& w, const SynthesisProblem& p, int eval_density) {
  double lo = std::numeric_limits<double>::infinity();
  for (double x : dense_pass_grid(p, eval_density)) lo = std::min(lo, pattern_at(w.weights(), p.cfg.spacing, x));
  return lo;
}

double stop_band_max(const Beamformer& w, const SynthesisProblem& p, double delta_t) {
  double hi = 0.0;
  for (double x : p.points(delta_t, Region::stop)) hi = std::max(hi, pattern_at(w.weights(), p.cfg.spacing, x));
  return hi;
}

SynthesisReport run_algorithm1(const SynthesisProblem& p, const SynthesisOptions& opts) {
  const auto schedule = p.delta_t_schedule();
  auto run_one = [&](double dt) {
    TraceEntry e;
    e.delta_t = dt;
    const auto t0 = std::chrono::steady_clock::now();
    std::optional<Beamformer> w;
    try {
      auto r = solve_p3(p, dt, opts);
      e.sigma = r.sigma;
      e.iterations = r.iterations;
      e.sigma_trace = std::move(r.sigma_trace);
      e.g_min = pass_band_min(r.w, p, opts.eval_density);
      w = r.w;
    } catch (const SynthesisError&) {
      e.ok = false;
      e.g_min = std::numeric_limits<double>::quiet_NaN();
      e.sigma = std::numeric_limits<double>::quiet_NaN();
    }
    e.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    return std::pair{std::move(e), std::move(w)};
  };

  // Widths that label the grid identically pose the same subproblems; solve each once.
  std::vector<std::vector<Region>> labels;
  std::vector<std::size_t> source(schedule.size());
  std::vector<double> distinct;
  for (std::size_t k = 0; k < schedule.size(); ++k) {
    const auto b = p.band(schedule[k]);
    std::vector<Region> l;
    l.reserve(p.grid.size());
    for (double x : p.grid) l.push_back(b.classify(x));
    const auto hit = std::find(labels.begin(), labels.end(), l);
    source[k] = static_cast<std::size_t>(hit - labels.begin());
    if (hit == labels.end()) {
      labels.push_back(std::move(l));
      distinct.push_back(schedule[k]);
    }
  }

  std::vector<std::pair<TraceEntry, std::optional<Beamformer>>> solved;
  if (opts.threads > 1 && distinct.size() > 1) {
    std::vector<std::future<std::pair<TraceEntry, std::optional<Beamformer>>>> pending;
    std::size_t next = 0;
    while (next < distinct.size() || !pending.empty()) {
      while (next < distinct.size() && pending.size() < opts.threads)
        pending.push_back(std::async(std::launch::async, run_one, distinct[next++]));
      solved.push_back(pending.front().get());
      pending.erase(pending.begin());
    }
  } else {
    for (double dt : distinct) solved.push_back(run_one(dt));
  }
  std::vector<std::pair<TraceEntry, std::optional<Beamformer>>> results;
  for (std::size_t k = 0; k < schedule.size(); ++k) {
    auto r = solved[source[k]];
    if (r.first.delta_t != schedule[k]) {
      r.first.delta_t = schedule[k];
      r.first.wall_ms = 0.0;
    }
    results.push_back(std::move(r));
  }

  SynthesisReport report;
  bool any = false;
  for (auto& [entry, w] : results) {
    if (entry.ok && (!any || entry.g_min > report.g_min)) {
      report.g_min = entry.g_min;
      report.best_w1 = *w;
      report.best_delta_t = entry.delta_t;
      any = true;
    }
    report.trace.push_back(std::move(entry));
  }
  if (!any) throw std::runtime_error("run_algorithm1: every transition width failed");
  return report;
}

SplitIterate alternate_once_p4(const SynthesisProblem& p, double delta_t, const SplitIterate& it, FixedBlock fixed,
                               const SynthesisOptions& opts) {
  const int M = p.cfg.antennas;
  const GridRows g = grid_rows(p, delta_t);
  const auto P = static_cast<Eigen::Index>(g.pass.size());
  const Eigen::Index nw = 2 * M, ieta = nw, u0 = nw + 1, n = nw + 1 + P;
  const Vector f = embed(fixed == FixedBlock::first ? it.w11 : it.w12);

  Vector c = Vector::Zero(n);
  c[ieta] = -1.0;
  ConeProgram prog(c);
  if (P > 0) {
    Matrix rows = Matrix::Zero(P, n);
    for (Eigen::Index i = 0; i < P; ++i) {
      rows(i, u0 + i) = 1.0;
      rows(i, ieta) = -1.0;
    }
    prog.add_nonneg(std::move(rows), Vector::Zero(P));
  }
  add_lower_bounds(prog, g, f, u0);
  add_common_caps(prog, g, f, p.r_s);

  const auto sol = checked_solve(prog, opts, "alternate_once_p4", it);
  SplitIterate next = it;
  (fixed == FixedBlock::first ? next.w12 : next.w11) = unembed(sol.primal.head(nw));
  next.sigma = -sol.primal[ieta];
  return next;
}

P4Result solve_p4(const SynthesisProblem& p, double delta_t, const CVector& init, const SynthesisOptions& opts) {
  if (init.size() != p.cfg.antennas) throw std::invalid_argument("solve_p4: init has wrong length");
  // Shrink into the feasible set with a little slack for the solver.
  double scale = 1.0 / init.norm();
  for (double x : p.points(delta_t, Region::stop)) {
    const double mag = std::abs(response(init, p.cfg.spacing, x));
    if (mag > 0.0) scale = std::min(scale, std::sqrt(p.r_s) / mag);
  }
  const CVector start = init * (scale * (1.0 - 1e-9));
  P4Result out;
  CVector best = start;
  double best_eta = min_pass_magnitude(Beamformer::normalized(start).weights(), p, delta_t);
  SplitIterate it = split(start, opts.split_spread, -min_pass_magnitude(start, p, delta_t));
  double sweep_start = it.sigma;
  for (int k = 0; k < opts.max_inner; ++k) {
    it = alternate_once_p4(p, delta_t, it, k % 2 == 0 ? FixedBlock::first : FixedBlock::second, opts);
    out.eta_trace.push_back(-it.sigma);
    ++out.iterations;
    const CVector w = it.sum();
    const double eta = min_pass_magnitude(Beamformer::normalized(w).weights(), p, delta_t);
    if (eta > best_eta) {
      best_eta = eta;
      best = w;
    }
    if (k % 2 == 1) {
      if (sweep_start - it.sigma < opts.inner_tol) break;
      sweep_start = it.sigma;
    }
  }
  out.w = Beamformer::normalized(best);
  out.eta = best_eta;
  return out;
}

CVector random_init(int antennas, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  CVector w(antennas);
  for (int m = 0; m < antennas; ++m) w[m] = {gauss(rng), gauss(rng)};
  return w;
}

P4SearchResult run_p4_random(const SynthesisProblem& p, int inits, std::uint64_t seed, const SynthesisOptions& opts,
                             std::vector<double> widths) {
  if (inits < 1) throw std::invalid_argument("run_p4_random: need at least one start");
  if (widths.empty()) widths = p.delta_t_schedule();
  P4SearchResult out;
  out.g_min = -1.0;
  for (int k = 0; k < inits; ++k) {
    const CVector start = random_init(p.cfg.antennas, seed + static_cast<std::uint64_t>(k));
    double best_here = -1.0;
    for (double dt : widths) {
      try {
        const auto r = solve_p4(p, dt, start, opts);
        const double g = pass_band_min(r.w, p, opts.eval_density);
        best_here = std::max(best_here, g);
        if (g > out.g_min) {
          out.g_min = g;
          out.best = r.w;
        }
      } catch (const SynthesisError&) {
      }
    }
    out.g_min_per_init.push_back(best_here);
  }
  if (out.g_min < 0.0) throw std::runtime_error("run_p4_random: every start failed");
  return out;
}

Beamformer zc_baseline(const ArrayConfig& cfg, int root) {
  const int M = cfg.antennas;
  if (root < 1 || std::gcd(root, M) != 1) throw std::invalid_argument("zc_baseline: root must be coprime to M");
  CVector w(M);
  for (int m = 0; m < M; ++m) {
    const double k = M % 2 == 0 ? static_cast<double>(m) * m : static_cast<double>(m) * (m + 1);
    w[m] = std::polar(1.0 / std::sqrt(static_cast<double>(M)), -kPi * root * k / M);
  }
  return Beamformer::normalized(w);
}

double magnitude_symmetry_defect(const CVector& w) {
  double worst = 0.0;
  const Eigen::Index M = w.size();
  for (Eigen::Index m = 0; m < M; ++m) worst = std::max(worst, std::abs(std::abs(w[m]) - std::abs(w[M - 1 - m])));
  return worst;
}

}  // namespace broadbeam
