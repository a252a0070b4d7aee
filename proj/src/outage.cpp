#include "broadbeam/outage.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <thread>
#include <vector>

#include <fmt/format.h>

namespace broadbeam {

namespace {

constexpr std::int64_t kBlock = 4096;

void check_support(const AngleInterval& s, const ArrayConfig& cfg) {
  constexpr double slack = 1e-12;
  if (!(s.lo <= s.hi)) throw std::domain_error("PAS support is empty");
  if (s.lo < cfg.radiating.lo - slack || s.hi > cfg.radiating.hi + slack)
    throw std::domain_error("PAS support leaves the radiating interval");
}

}  // namespace

PASpec uniform_pas(double lo, double hi) {
  if (!(hi > lo)) throw std::invalid_argument("uniform PAS needs hi > lo");
  return {PASpec::Profile::uniform, {lo, hi}, {}};
}

PASpec dirac_pas(double theta) { return {PASpec::Profile::dirac, {theta, theta}, {}}; }

PASpec tabulated_pas(double lo, double hi, std::function<double(double)> density) {
  if (!(hi > lo)) throw std::invalid_argument("tabulated PAS needs hi > lo");
  if (!density) throw std::invalid_argument("tabulated PAS needs a density");
  return {PASpec::Profile::tabulated, {lo, hi}, std::move(density)};
}

Eigen::MatrixXcd covariance(const PASpec& pas, const ArrayConfig& cfg, int quad_points) {
  check_support(pas.support, cfg);
  const int M = cfg.antennas;
  if (pas.profile == PASpec::Profile::dirac) {
    const CVector a = steering_vector(cfg, pas.support.lo);
    return a * a.adjoint();
  }
  if (quad_points < 2) throw std::invalid_argument("quad_points must be at least 2");
  const auto thetas = linspace(pas.support.lo, pas.support.hi, quad_points);
  std::vector<double> weight(thetas.size());
  double total = 0.0;
  for (std::size_t i = 0; i < thetas.size(); ++i) {
    const double f = pas.profile == PASpec::Profile::uniform ? 1.0 : pas.density(thetas[i]);
    if (f < 0.0) throw std::domain_error("PAS density is negative");
    weight[i] = f * ((i == 0 || i + 1 == thetas.size()) ? 0.5 : 1.0);
    total += weight[i];
  }
  if (!(total > 0.0)) throw std::domain_error("PAS density integrates to zero");

  // Toeplitz: R(m, n) = r[m - n], r[k] = sum_i c_i exp(-j 2 pi D sin(theta_i) k).
  CVector r = CVector::Zero(M);
  for (std::size_t i = 0; i < thetas.size(); ++i) {
    const double c = weight[i] / total;
    if (c == 0.0) continue;
    const cdouble step = std::polar(1.0, -2.0 * kPi * cfg.spacing * std::sin(thetas[i]));
    cdouble z = 1.0;
    for (int k = 0; k < M; ++k) {
      r[k] += c * z;
      z *= step;
    }
  }
  Eigen::MatrixXcd out(M, M);
  for (int m = 0; m < M; ++m)
    for (int n = 0; n < M; ++n) out(m, n) = m >= n ? r[m - n] : std::conj(r[n - m]);
  return out;
}

double effective_gain(const CVector& w, const Eigen::MatrixXcd& r) {
  if (r.rows() != w.size() || r.cols() != w.size()) throw std::invalid_argument("effective_gain: dimension mismatch");
  return std::max(0.0, w.dot(r * w).real());
}

void validate(const OutageSpec& spec) {
  if (!(spec.rate > 0.0)) throw std::invalid_argument("rate must be positive");
  if (!(spec.max_outage > 0.0 && spec.max_outage < 1.0)) throw std::invalid_argument("max_outage must lie in (0, 1)");
  if (!(spec.rho > 0.0)) throw std::invalid_argument("rho must be positive");
}

double outage_closed_form(double q, const OutageSpec& spec) {
  if (q <= 0.0) return 1.0;
  return -std::expm1(-(std::exp2(spec.rate) - 1.0) / (spec.rho * q));
}

Eigen::MatrixXcd hermitian_sqrt(const Eigen::MatrixXcd& r) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(r);
  if (es.info() != Eigen::Success) throw std::runtime_error("hermitian_sqrt: eigendecomposition failed");
  Eigen::VectorXd ev = es.eigenvalues();
  if (ev.minCoeff() < -1e-8)
    throw std::domain_error(fmt::format("covariance is not PSD (eigenvalue {})", ev.minCoeff()));
  ev = ev.cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
}

MonteCarloEstimate outage_monte_carlo(const CVector& w, const Eigen::MatrixXcd& r, const OutageSpec& spec,
                                      std::int64_t trials, std::uint64_t seed, unsigned workers) {
  if (trials < 1000) throw std::invalid_argument("trials must be at least 1000");
  if (r.rows() != w.size()) throw std::invalid_argument("outage_monte_carlo: dimension mismatch");
  // h^H w = h_iid^H (R^{1/2} w) since the square root is Hermitian.
  const CVector v = hermitian_sqrt(r) * w;
  const double threshold = (std::exp2(spec.rate) - 1.0) / spec.rho;  // outage iff |h^H w|^2 < threshold
  const std::int64_t blocks = (trials + kBlock - 1) / kBlock;

  auto run_block = [&](std::int64_t b) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
    std::mt19937_64 rng(seq);
    std::normal_distribution<double> gauss(0.0, std::sqrt(0.5));
    const std::int64_t n = std::min(kBlock, trials - b * kBlock);
    std::int64_t count = 0;
    for (std::int64_t t = 0; t < n; ++t) {
      cdouble z = 0.0;
      for (Eigen::Index m = 0; m < v.size(); ++m) {
        const double re = gauss(rng), im = gauss(rng);
        z += cdouble(re, -im) * v[m];
      }
      if (std::norm(z) < threshold) ++count;
    }
    return count;
  };

  std::vector<std::int64_t> counts(static_cast<std::size_t>(blocks), 0);
  const unsigned nw = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(blocks)));
  if (nw == 1) {
    for (std::int64_t b = 0; b < blocks; ++b) counts[static_cast<std::size_t>(b)] = run_block(b);
  } else {
    std::vector<std::thread> pool;
    for (unsigned k = 0; k < nw; ++k)
      pool.emplace_back([&, k] {
        for (std::int64_t b = k; b < blocks; b += nw) counts[static_cast<std::size_t>(b)] = run_block(b);
      });
    for (auto& t : pool) t.join();
  }

  MonteCarloEstimate out;
  out.trials = trials;
  for (auto c : counts) out.outages += c;
  out.estimate = static_cast<double>(out.outages) / static_cast<double>(trials);
  out.std_error = std::sqrt(out.estimate * (1.0 - out.estimate) / static_cast<double>(trials));
  out.ci_lo = std::max(0.0, out.estimate - 1.96 * out.std_error);
  out.ci_hi = std::min(1.0, out.estimate + 1.96 * out.std_error);
  return out;
}

std::string to_string(PasFamily::Kind k) { return k == PasFamily::Kind::dirac_grid ? "dirac" : "uniform"; }

bool MinPowerReport::finite() const { return std::isfinite(rho_star); }

double min_power_for_gain(double q, const OutageSpec& spec) {
  if (!(spec.max_outage > 0.0 && spec.max_outage < 1.0)) throw std::invalid_argument("max_outage must lie in (0, 1)");
  if (q <= 0.0) return std::numeric_limits<double>::infinity();
  return (std::exp2(spec.rate) - 1.0) / (q * -std::log1p(-spec.max_outage));
}

MinPowerReport min_power(const Beamformer& w, const ArrayConfig& cfg, const OutageSpec& spec,
                         const PasFamily& family) {
  if (family.grid_points < 2) throw std::invalid_argument("grid_points must be at least 2");
  const auto thetas = linspace(cfg.sector.lo, cfg.sector.hi, family.grid_points);
  std::vector<double> g(thetas.size());
  for (std::size_t i = 0; i < thetas.size(); ++i) g[i] = pattern_at(w.weights(), cfg.spacing, std::sin(thetas[i]));

  MinPowerReport rep;
  rep.q_star = std::numeric_limits<double>::infinity();
  if (family.kind == PasFamily::Kind::dirac_grid) {
    for (std::size_t i = 0; i < g.size(); ++i)
      if (g[i] < rep.q_star) {
        rep.q_star = g[i];
        rep.theta_star = thetas[i];
      }
  } else {
    const double h = (thetas.back() - thetas.front()) / static_cast<double>(thetas.size() - 1);
    const auto span = static_cast<std::size_t>(std::ceil(family.min_width / h - 1e-9));
    if (family.min_width <= 0.0 || span >= thetas.size())
      throw std::invalid_argument("window width must be positive and fit inside the sector");
    // Prefix trapezoid integrals of g.
    std::vector<double> cum(g.size(), 0.0);
    for (std::size_t i = 1; i < g.size(); ++i) cum[i] = cum[i - 1] + 0.5 * h * (g[i - 1] + g[i]);
    for (std::size_t i = 0; i + span < g.size(); ++i) {
      const double q = (cum[i + span] - cum[i]) / (h * static_cast<double>(span));
      if (q < rep.q_star) {
        rep.q_star = q;
        rep.theta_star = 0.5 * (thetas[i] + thetas[i + span]);
      }
    }
  }
  rep.rho_star = min_power_for_gain(rep.q_star, spec);
  return rep;
}

}  // namespace broadbeam
