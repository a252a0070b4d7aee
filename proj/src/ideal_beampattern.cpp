#include "broadbeam/ideal_beampattern.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace broadbeam {

double IdealBeampattern::xi_star_db() const { return 10.0 * std::log10(xi_star); }

double IdealBeampattern::level(double x) const {
  return (x >= pass_lo && x <= pass_hi) ? xi_star : 0.0;
}

IdealBeampattern ideal_level(const ArrayConfig& cfg) {
  const double width = cfg.pass_hi() - cfg.pass_lo();
  if (!(width > 0.0)) throw std::domain_error("ideal_level: degenerate sector");
  return {1.0 / (cfg.spacing * width), cfg.pass_lo(), cfg.pass_hi()};
}

double parseval_bound(const Beamformer& w, const ArrayConfig& cfg, int points) {
  if (points < 2) throw std::invalid_argument("parseval_bound: need at least two points");
  const auto xs = linspace(cfg.pass_lo(), cfg.pass_hi(), points);
  std::vector<double> g(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) g[i] = pattern_at(w.weights(), cfg.spacing, xs[i]);
  return trapezoid(g, (cfg.pass_hi() - cfg.pass_lo()) / (points - 1));
}

double dtft_energy(const CVector& w, int points) {
  // One period of a trigonometric polynomial: the trapezoid rule is exact
  // once points exceeds the degree.
  const auto omegas = linspace(-kPi, kPi, points);
  std::vector<double> f(omegas.size());
  for (std::size_t i = 0; i < omegas.size(); ++i) f[i] = pattern_at(w, 1.0, omegas[i] / (2.0 * kPi));
  return trapezoid(f, 2.0 * kPi / (points - 1)) / (2.0 * kPi);
}

}  // namespace broadbeam
