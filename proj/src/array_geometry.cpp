#include "broadbeam/array_geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace broadbeam {

double ArrayConfig::x_lo() const { return std::sin(radiating.lo); }
double ArrayConfig::x_hi() const { return std::sin(radiating.hi); }
double ArrayConfig::pass_lo() const { return std::sin(sector.lo); }
double ArrayConfig::pass_hi() const { return std::sin(sector.hi); }

bool ArrayConfig::full_sector() const {
  return sector.lo <= radiating.lo && sector.hi >= radiating.hi;
}

void validate(const ArrayConfig& cfg) {
  if (cfg.antennas < 1) throw std::invalid_argument("antennas must be positive");
  if (!(cfg.spacing > 0.0) || !std::isfinite(cfg.spacing))
    throw std::invalid_argument("spacing must be positive");
  if (cfg.rf_chains < 1) throw std::invalid_argument("rf_chains must be positive");
  if (!(cfg.sector.lo < cfg.sector.hi))
    throw std::invalid_argument("sector: Theta_min must be below Theta_max");
  if (!(cfg.radiating.lo <= cfg.sector.lo && cfg.sector.hi <= cfg.radiating.hi))
    throw std::invalid_argument("sector must lie inside the radiating interval");

  const double eps = 1e-12;
  const double limit = cfg.spacing <= 0.5 ? kPi / 2 : std::asin(1.0 / (2.0 * cfg.spacing));
  if (cfg.radiating.lo < -limit - eps || cfg.radiating.hi > limit + eps)
    throw std::invalid_argument("radiating interval violates the angle-ambiguity bound for spacing " +
                                std::to_string(cfg.spacing));
}

ArrayConfig make_array_config(int antennas, double spacing, AngleInterval radiating,
                              AngleInterval sector, int rf_chains) {
  ArrayConfig cfg{antennas, spacing, radiating, sector, rf_chains};
  validate(cfg);
  return cfg;
}

Beamformer Beamformer::normalized(CVector weights) {
  const double n = weights.norm();
  if (!(n > 0.0) || !std::isfinite(n)) throw std::domain_error("beamformer: zero or non-finite weights");
  return Beamformer(weights / n);
}

Beamformer Beamformer::from_unit(CVector weights) {
  if (std::abs(weights.norm() - 1.0) > 1e-9) throw std::domain_error("beamformer: weights not unit norm");
  return Beamformer(std::move(weights));
}

double Beamformer::papr() const {
  return static_cast<double>(weights_.size()) * weights_.cwiseAbs2().maxCoeff() /
         weights_.squaredNorm();
}

SpatialFrequencyBand::Region SpatialFrequencyBand::classify(double x) const {
  if (x >= pass_lo && x <= pass_hi) return Region::pass;
  const double dist = x < pass_lo ? pass_lo - x : x - pass_hi;
  return dist < transition_width ? Region::transition : Region::stop;
}

bool SpatialFrequencyBand::has_stop() const {
  return pass_lo - transition_width > range_lo || pass_hi + transition_width < range_hi;
}

SpatialFrequencyBand make_band(const ArrayConfig& cfg, double transition_width) {
  if (transition_width < 0.0) throw std::invalid_argument("transition width must be nonnegative");
  SpatialFrequencyBand band;
  band.range_lo = cfg.x_lo();
  band.range_hi = cfg.x_hi();
  band.pass_lo = cfg.pass_lo();
  band.pass_hi = cfg.pass_hi();
  band.transition_width = cfg.full_sector() ? 0.0 : transition_width;
  return band;
}

CVector steering_vector_sf(int antennas, double spacing, double x) {
  CVector a(antennas);
  const double phase = -2.0 * kPi * spacing * x;
  for (int m = 0; m < antennas; ++m) a[m] = std::polar(1.0, phase * m);
  return a;
}

CVector steering_vector(const ArrayConfig& cfg, double theta) {
  if (theta < cfg.radiating.lo - 1e-12 || theta > cfg.radiating.hi + 1e-12)
    throw std::domain_error("steering_vector: angle outside the radiating interval");
  return steering_vector_sf(cfg.antennas, cfg.spacing, std::sin(theta));
}

double beampattern(const Beamformer& w, const ArrayConfig& cfg, double theta) {
  const CVector a = steering_vector(cfg, theta);
  return std::norm(w.weights().dot(a));  // Eigen dot conjugates the left operand
}

double pattern_at(const CVector& w, double spacing, double x) {
  // Horner on z = e^{-j 2 pi D x} over conj(w).
  const cdouble z = std::polar(1.0, -2.0 * kPi * spacing * x);
  cdouble acc = 0.0;
  for (Eigen::Index m = w.size() - 1; m >= 0; --m) acc = acc * z + std::conj(w[m]);
  return std::norm(acc);
}

RVector beampattern_grid(const Beamformer& w, const ArrayConfig& cfg, std::span<const double> xs) {
  const double lo = cfg.x_lo() - 1e-12, hi = cfg.x_hi() + 1e-12;
  RVector out(static_cast<Eigen::Index>(xs.size()));
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (xs[i] < lo || xs[i] > hi) throw std::domain_error("beampattern_grid: spatial frequency out of range");
    out[static_cast<Eigen::Index>(i)] = pattern_at(w.weights(), cfg.spacing, xs[i]);
  }
  return out;
}

double angular_to_spatial_width(const ArrayConfig& cfg, double delta_rad) {
  if (delta_rad < 0.0) throw std::invalid_argument("transition width must be nonnegative");
  if (cfg.full_sector() || delta_rad == 0.0) return 0.0;
  double width = std::numeric_limits<double>::infinity();
  if (cfg.sector.lo > cfg.radiating.lo) {
    const double edge = std::max(cfg.sector.lo - delta_rad, -kPi / 2);
    width = std::min(width, std::sin(cfg.sector.lo) - std::sin(edge));
  }
  if (cfg.sector.hi < cfg.radiating.hi) {
    const double edge = std::min(cfg.sector.hi + delta_rad, kPi / 2);
    width = std::min(width, std::sin(edge) - std::sin(cfg.sector.hi));
  }
  return width;
}

std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> xs(static_cast<std::size_t>(std::max(n, 0)));
  if (n == 1) xs[0] = lo;
  for (int i = 0; i < n && n > 1; ++i) xs[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (n - 1);
  return xs;
}

double trapezoid(std::span<const double> ys, double h) {
  if (ys.size() < 2) return 0.0;
  double s = 0.5 * (ys.front() + ys.back());
  for (std::size_t i = 1; i + 1 < ys.size(); ++i) s += ys[i];
  return s * h;
}

}  // namespace broadbeam
