#pragma once

#include "broadbeam/array_geometry.hpp"

namespace broadbeam {

/// Flat in-sector / zero out-of-sector pattern that minimizes worst-case
/// transmit power. Only the sector and spacing matter.
struct IdealBeampattern {
  double xi_star = 0.0;
  double pass_lo = 0.0;
  double pass_hi = 0.0;

  double xi_star_db() const;
  /// Level at spatial frequency x: xi_star inside the pass band, 0 outside.
  double level(double x) const;
};

IdealBeampattern ideal_level(const ArrayConfig& cfg);

/// Integral of the beampattern over the pass band in spatial frequency.
/// Bounded above by 1/D for unit-norm weights.
double parseval_bound(const Beamformer& w, const ArrayConfig& cfg, int points = 8193);

/// Integral of |F(Omega)|^2 over [-pi, pi] divided by 2 pi; equals ||w||^2.
double dtft_energy(const CVector& w, int points = 8193);

}  // namespace broadbeam
