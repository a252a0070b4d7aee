#pragma once

#include <complex>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace broadbeam {

using cdouble = std::complex<double>;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;

inline constexpr double kPi = 3.14159265358979323846;

inline double deg2rad(double deg) { return deg * kPi / 180.0; }
inline double rad2deg(double rad) { return rad * 180.0 / kPi; }

/// Closed angular interval in radians.
struct AngleInterval {
  double lo = 0.0;
  double hi = 0.0;
};

/// Uniform linear array with ideal directional elements.
///
/// `radiating` is the element radiating interval [Theta_1, Theta_2] and
/// `sector` the served interval [Theta_min, Theta_max] inside it. Angles are
/// radians. Construct through `make_array_config`, which enforces the
/// angle-ambiguity bounds for the given spacing.
struct ArrayConfig {
  int antennas = 64;
  double spacing = 0.5;  // wavelengths
  AngleInterval radiating{-kPi / 2, kPi / 2};
  AngleInterval sector{-kPi / 6, kPi / 6};
  int rf_chains = 4;

  /// sin(Theta_1), sin(Theta_2): the usable spatial-frequency range.
  double x_lo() const;
  double x_hi() const;
  /// sin(Theta_min), sin(Theta_max): the pass band.
  double pass_lo() const;
  double pass_hi() const;

  bool full_sector() const;
};

/// Throws std::invalid_argument naming the offending field.
void validate(const ArrayConfig& cfg);

ArrayConfig make_array_config(int antennas, double spacing, AngleInterval radiating,
                              AngleInterval sector, int rf_chains = 4);

/// Unit-norm complex weight vector.
class Beamformer {
 public:
  Beamformer() = default;
  /// Rescales to unit norm; throws std::domain_error on a zero vector.
  static Beamformer normalized(CVector weights);
  /// Wraps weights that are already unit norm (checked to 1e-9).
  static Beamformer from_unit(CVector weights);

  const CVector& weights() const { return weights_; }
  int size() const { return static_cast<int>(weights_.size()); }
  double papr() const;

 private:
  explicit Beamformer(CVector w) : weights_(std::move(w)) {}
  CVector weights_;
};

/// Pass / transition / stop partition of the spatial-frequency axis.
struct SpatialFrequencyBand {
  double range_lo = -1.0;
  double range_hi = 1.0;
  double pass_lo = -0.5;
  double pass_hi = 0.5;
  double transition_width = 0.0;

  enum class Region { pass, transition, stop };
  /// Points at distance (0, transition_width) from a pass edge are transition.
  Region classify(double x) const;
  bool has_stop() const;
};

SpatialFrequencyBand make_band(const ArrayConfig& cfg, double transition_width);

/// Steering vector alpha(theta); element m is exp(-j 2 pi D sin(theta) m).
CVector steering_vector(const ArrayConfig& cfg, double theta);
/// Same, parameterised by spatial frequency x = sin(theta). No range check.
CVector steering_vector_sf(int antennas, double spacing, double x);

/// |w^H alpha(theta)|^2.
double beampattern(const Beamformer& w, const ArrayConfig& cfg, double theta);

/// Beampattern at spatial frequencies via the DTFT |sum_m conj(w_m) e^{-j 2 pi D x m}|^2.
RVector beampattern_grid(const Beamformer& w, const ArrayConfig& cfg, std::span<const double> xs);

/// DTFT form for raw (not necessarily unit) weights; no range check.
double pattern_at(const CVector& w, double spacing, double x);

/// Spatial-frequency width of an angular transition of `delta_rad` placed
/// outside each pass edge that borders a stop region. The narrower of the
/// two edges wins; zero for a full sector.
double angular_to_spatial_width(const ArrayConfig& cfg, double delta_rad);

/// n equally spaced points on [lo, hi], both endpoints included.
std::vector<double> linspace(double lo, double hi, int n);

/// Composite trapezoid of samples on a uniform grid with step h.
double trapezoid(std::span<const double> ys, double h);

}  // namespace broadbeam
