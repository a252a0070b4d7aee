#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "broadbeam/array_geometry.hpp"
#include "broadbeam/conic_solver.hpp"
#include "broadbeam/ideal_beampattern.hpp"

namespace broadbeam {

/// Discretized broadbeam design problem over the spatial-frequency axis.
///
/// The grid is uniform over [sin Theta_1, sin Theta_2]. Which points are
/// pass, transition or stop depends on the transition width, so labels are
/// produced per width by `band` / `points`.
struct SynthesisProblem {
  ArrayConfig cfg;
  IdealBeampattern ideal;
  double xi_star = 0.0;
  double r_s = 0.0;  ///< stop-band power cap
  std::vector<double> grid;
  double delta_t_max = 0.0;   ///< spatial-frequency units
  double delta_t_step = 0.0;  ///< spatial-frequency units

  SpatialFrequencyBand band(double delta_t) const { return make_band(cfg, delta_t); }
  std::vector<double> points(double delta_t, SpatialFrequencyBand::Region region) const;
  /// Transition widths visited by run_algorithm1: delta_t_max down to (excluding) 0.
  std::vector<double> delta_t_schedule() const;
  double grid_step() const;
};

/// r_s = xi_star * r_s_ratio; grid_density * M uniform points.
/// A full sector forces both transition parameters to 0.
SynthesisProblem build_problem(const ArrayConfig& cfg, double r_s_ratio, int grid_density, double delta_t_max,
                               double delta_t_step);

struct SynthesisOptions {
  double inner_tol = 1e-5;
  int max_inner = 50;
  double split_spread = 1e-2;  ///< relative size of w11 - w12 at the start of the alternation
  int eval_density = 10;  ///< dense pass-band evaluation relative to the optimization grid
  conic::SolverOptions solver{};
  unsigned threads = 1;  ///< concurrent transition widths in run_algorithm1
};

/// w = w11 + w12 under the multiconvex split.
struct SplitIterate {
  CVector w11;
  CVector w12;
  double sigma = 0.0;  ///< objective of the last solve (sigma for P3, -eta for P4)
  CVector sum() const { return w11 + w12; }
};

enum class FixedBlock { first, second };

/// A convex subproblem did not return an optimal point.
class SynthesisError : public std::runtime_error {
 public:
  SynthesisError(const std::string& what, SplitIterate last) : std::runtime_error(what), last_(std::move(last)) {}
  const SplitIterate& last_feasible() const { return last_; }

 private:
  SplitIterate last_;
};

struct InitResult {
  CVector raw;  ///< solver output, norm <= 1
  double sigma = 0.0;
};

/// Single convex solve: minimize sigma with |w^H a(x) - sqrt(xi) e^{-j pi D x (M-1)}| <= sigma
/// on the pass grid (zero phase about the array centre), stop caps and the unit ball.
InitResult initialize_raw(const SynthesisProblem& p, double delta_t, const SynthesisOptions& opts = {});
Beamformer initialize(const SynthesisProblem& p, double delta_t, const SynthesisOptions& opts = {});

/// One block update of the P3 split: the free block and sigma are re-optimized.
SplitIterate alternate_once(const SynthesisProblem& p, double delta_t, const SplitIterate& it, FixedBlock fixed,
                            const SynthesisOptions& opts = {});

struct P3Result {
  Beamformer w;
  double sigma = 0.0;  ///< max over the pass grid of ||w^H a| - sqrt(xi)| for the returned w
                       ///< (the best iterate, initialization included)
  double init_sigma = 0.0;
  std::vector<double> sigma_trace;  ///< solver sigma after each alternation
  int iterations = 0;
};

P3Result solve_p3(const SynthesisProblem& p, double delta_t, const SynthesisOptions& opts = {});

struct TraceEntry {
  double delta_t = 0.0;
  double g_min = 0.0;
  double sigma = 0.0;
  int iterations = 0;
  double wall_ms = 0.0;
  bool ok = true;
  std::vector<double> sigma_trace;
};

struct SynthesisReport {
  Beamformer best_w1;
  double g_min = 0.0;
  double best_delta_t = 0.0;
  std::vector<TraceEntry> trace;
};

/// Grid search over the transition width; keeps the largest dense-grid g_min.
SynthesisReport run_algorithm1(const SynthesisProblem& p, const SynthesisOptions& opts = {});

/// Minimum beampattern over the dense pass-band grid.
double pass_band_min(const Beamformer& w, const SynthesisProblem& p, int eval_density = 10);
std::vector<double> dense_pass_grid(const SynthesisProblem& p, int eval_density = 10);
double stop_band_max(const Beamformer& w, const SynthesisProblem& p, double delta_t);

/// One block update of the P4 split (maximize the pass-band floor eta).
SplitIterate alternate_once_p4(const SynthesisProblem& p, double delta_t, const SplitIterate& it, FixedBlock fixed,
                               const SynthesisOptions& opts = {});

struct P4Result {
  Beamformer w;
  double eta = 0.0;  ///< min over the pass grid of |w^H a| for the returned w
  std::vector<double> eta_trace;
  int iterations = 0;
};

/// Direct max-min design started from `init`. The start is shrunk until it
/// meets the stop caps and the unit ball, then split evenly.
P4Result solve_p4(const SynthesisProblem& p, double delta_t, const CVector& init, const SynthesisOptions& opts = {});

/// Complex Gaussian start for P4, deterministic in seed.
CVector random_init(int antennas, std::uint64_t seed);

struct P4SearchResult {
  Beamformer best;
  double g_min = 0.0;
  std::vector<double> g_min_per_init;
};

/// P4 from `inits` random starts, each run at every width in `widths`
/// (the run_algorithm1 schedule when empty).
P4SearchResult run_p4_random(const SynthesisProblem& p, int inits, std::uint64_t seed,
                             const SynthesisOptions& opts = {}, std::vector<double> widths = {});

/// Zadoff-Chu beamformer (1/sqrt M) exp(-j pi u m^2 / M); odd M uses m(m+1).
Beamformer zc_baseline(const ArrayConfig& cfg, int root = 1);

/// max_m ||w_m| - |w_{M-1-m}||. Diagnostic only.
double magnitude_symmetry_defect(const CVector& w);

}  // namespace broadbeam
