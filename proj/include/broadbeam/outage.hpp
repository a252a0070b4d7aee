#pragma once

#include <cstdint>
#include <functional>
#include <string>

#include "broadbeam/array_geometry.hpp"

namespace broadbeam {

/// Power angular spectrum over an angular support (radians).
struct PASpec {
  enum class Profile { uniform, dirac, tabulated };
  Profile profile = Profile::uniform;
  AngleInterval support{};
  /// Unnormalized density for tabulated profiles; normalized on the quadrature nodes.
  std::function<double(double)> density;
};

PASpec uniform_pas(double lo, double hi);
PASpec dirac_pas(double theta);
PASpec tabulated_pas(double lo, double hi, std::function<double(double)> density);

/// R = int f(theta) a(theta) a(theta)^H dtheta by trapezoid quadrature with
/// weights normalized to one, so trace(R) = M. Throws std::domain_error when
/// the support leaves the radiating interval.
Eigen::MatrixXcd covariance(const PASpec& pas, const ArrayConfig& cfg, int quad_points = 4097);

/// w^H R w, clamped at zero.
double effective_gain(const CVector& w, const Eigen::MatrixXcd& r);

struct OutageSpec {
  double rate = 1.0;        ///< bits/s/Hz
  double max_outage = 0.01;
  double rho = 1.0;         ///< normalized transmit power, linear
};

/// Throws std::invalid_argument naming the field.
void validate(const OutageSpec& spec);

/// 1 - exp(-(2^R - 1) / (rho q)); 1 when q <= 0.
double outage_closed_form(double q, const OutageSpec& spec);

struct MonteCarloEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
  double ci_lo = 0.0;  ///< 95% normal-approximation interval
  double ci_hi = 0.0;
  std::int64_t trials = 0;
  std::int64_t outages = 0;
};

/// Hermitian square root; eigenvalues below -1e-8 raise std::domain_error,
/// the rest are clipped at zero.
Eigen::MatrixXcd hermitian_sqrt(const Eigen::MatrixXcd& r);

/// Draws h = R^{1/2} h_iid and counts log2(1 + rho |h^H w|^2) < R. Trials are
/// split into fixed blocks with their own seeded streams, so the result does
/// not depend on `workers`.
MonteCarloEstimate outage_monte_carlo(const CVector& w, const Eigen::MatrixXcd& r, const OutageSpec& spec,
                                      std::int64_t trials, std::uint64_t seed, unsigned workers = 1);

struct PasFamily {
  enum class Kind { dirac_grid, uniform_windows };
  Kind kind = Kind::dirac_grid;
  double min_width = 0.0;  ///< radians, uniform windows only
  int grid_points = 4096;

  static PasFamily dirac_grid(int points = 4096) { return {Kind::dirac_grid, 0.0, points}; }
  static PasFamily uniform_windows(double min_width, int points = 4096) {
    return {Kind::uniform_windows, min_width, points};
  }
};

std::string to_string(PasFamily::Kind k);

struct MinPowerReport {
  double q_star = 0.0;
  double theta_star = 0.0;  ///< argmin angle (window centre for uniform windows)
  double rho_star = 0.0;    ///< infinity when q_star <= 0
  bool finite() const;
};

/// Worst-case effective gain over the family inside the sector and the
/// smallest rho meeting the outage target for it.
MinPowerReport min_power(const Beamformer& w, const ArrayConfig& cfg, const OutageSpec& spec,
                         const PasFamily& family);

/// (2^R - 1) / (q (-ln(1 - P_out))); infinity for q <= 0.
double min_power_for_gain(double q, const OutageSpec& spec);

}  // namespace broadbeam
