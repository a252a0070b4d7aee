#include <random>

#include "doctest.h"

#include "broadbeam/outage.hpp"

using namespace broadbeam;

namespace {

ArrayConfig config(int M) { return make_array_config(M, 0.5, {-kPi / 2, kPi / 2}, {deg2rad(-30), deg2rad(30)}); }

CVector random_unit(std::mt19937_64& rng, int M) {
  std::normal_distribution<double> g;
  CVector w(M);
  for (auto& x : w) x = {g(rng), g(rng)};
  return w / w.norm();
}

}  // namespace

TEST_CASE("covariance invariants") {
  const auto cfg = config(8);
  for (const auto& pas : {uniform_pas(-0.3, 0.2), dirac_pas(0.1),
                          tabulated_pas(-0.5, 0.5, [](double t) { return 1.0 + t; })}) {
    const auto r = covariance(pas, cfg);
    CHECK((r - r.adjoint()).cwiseAbs().maxCoeff() <= 1e-10);
    CHECK(std::abs(r.trace().real() - 8.0) <= 1e-4);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(r);
    CHECK(es.eigenvalues().minCoeff() >= -1e-8);
  }
}

TEST_CASE("dirac covariance is the steering outer product") {
  const auto cfg = config(6);
  const auto r = covariance(dirac_pas(0.3), cfg);
  const CVector a = steering_vector(cfg, 0.3);
  CHECK((r - a * a.adjoint()).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(effective_gain(a / a.norm(), r) == doctest::Approx(6.0));
}

TEST_CASE("narrow uniform PAS tends to the dirac case") {
  const auto cfg = config(8);
  const auto ref = covariance(dirac_pas(0.2), cfg);
  double prev = 1e9;
  for (double width : {0.1, 0.01, 0.001}) {
    const double err = (covariance(uniform_pas(0.2 - width / 2, 0.2 + width / 2), cfg) - ref).cwiseAbs().maxCoeff();
    CHECK(err < prev);
    prev = err;
  }
  CHECK(prev <= 1e-3);
}

TEST_CASE("flat spatial-frequency density gives the identity") {
  const auto cfg = make_array_config(8, 0.5, {-kPi / 2, kPi / 2}, {-kPi / 2, kPi / 2});
  const auto r = covariance(tabulated_pas(-kPi / 2, kPi / 2, [](double t) { return std::cos(t); }), cfg, 20001);
  CHECK((r - Eigen::MatrixXcd::Identity(8, 8)).cwiseAbs().maxCoeff() <= 1e-2);
}

TEST_CASE("support outside the radiating interval is rejected") {
  const auto cfg = make_array_config(4, 0.5, {-1.0, 1.0}, {-0.5, 0.5});
  CHECK_THROWS_AS(covariance(uniform_pas(-1.2, 0.0), cfg), std::domain_error);
  CHECK_THROWS_AS(covariance(dirac_pas(1.1), cfg), std::domain_error);
}

TEST_CASE("effective gain") {
  std::mt19937_64 rng(1);
  const CVector w = random_unit(rng, 8);
  CHECK(effective_gain(w, Eigen::MatrixXcd::Identity(8, 8)) == doctest::Approx(1.0));
  const auto cfg = config(8);
  const double theta = 0.25;
  const auto b = Beamformer::normalized(w);
  CHECK(effective_gain(w, covariance(dirac_pas(theta), cfg)) == doctest::Approx(beampattern(b, cfg, theta)));
  // A uniform PAS over the sector averages g, so it sits between its extremes.
  const auto r = covariance(uniform_pas(cfg.sector.lo, cfg.sector.hi), cfg);
  double lo = 1e9, hi = 0.0;
  for (double t : linspace(cfg.sector.lo, cfg.sector.hi, 4001)) {
    lo = std::min(lo, beampattern(b, cfg, t));
    hi = std::max(hi, beampattern(b, cfg, t));
  }
  const double q = effective_gain(w, r);
  CHECK(q >= lo - 1e-9);
  CHECK(q <= hi + 1e-9);
}

TEST_CASE("closed-form outage") {
  OutageSpec s{1.0, 0.01, 5.0};
  CHECK(outage_closed_form(2.0, s) == doctest::Approx(1.0 - std::exp(-0.1)).epsilon(1e-12));
  s.rho = 1.0 / std::log(2.0);
  CHECK(outage_closed_form(1.0, s) == doctest::Approx(0.5).epsilon(1e-12));
  s.rho = 1e300;
  CHECK(outage_closed_form(1.0, s) <= 1e-290);
  CHECK(outage_closed_form(0.0, s) == 1.0);
  double prev = 1.0;
  for (double rho : {0.1, 1.0, 10.0, 100.0}) {
    const double p = outage_closed_form(1.0, OutageSpec{1.0, 0.01, rho});
    CHECK(p < prev);
    prev = p;
  }
  prev = 1.0;
  for (double q : {0.1, 0.5, 1.0, 2.0}) {
    const double p = outage_closed_form(q, OutageSpec{2.0, 0.01, 3.0});
    CHECK(p < prev);
    prev = p;
  }
  CHECK_THROWS_AS(validate(OutageSpec{0.0, 0.1, 1.0}), std::invalid_argument);
  CHECK_THROWS_AS(validate(OutageSpec{1.0, 1.0, 1.0}), std::invalid_argument);
  CHECK_THROWS_AS(validate(OutageSpec{1.0, 0.1, -1.0}), std::invalid_argument);
}

TEST_CASE("Monte Carlo agrees with the closed form") {
  const auto cfg = config(8);
  std::mt19937_64 rng(77);
  const PASpec cases[] = {dirac_pas(0.2), uniform_pas(-0.4, 0.1), uniform_pas(cfg.sector.lo, cfg.sector.hi)};
  for (const auto& pas : cases) {
    const CVector w = random_unit(rng, 8);
    const auto r = covariance(pas, cfg);
    const double q = effective_gain(w, r);
    const OutageSpec s{1.0, 0.01, 2.0 / q};
    const double p = outage_closed_form(q, s);
    const auto mc = outage_monte_carlo(w, r, s, 40000, 9);
    const double sd = std::sqrt(p * (1 - p) / 40000.0);
    CHECK(std::abs(mc.estimate - p) <= 3 * sd);
    CHECK(mc.ci_lo <= mc.estimate);
    CHECK(mc.ci_hi >= mc.estimate);
  }
}

TEST_CASE("Monte Carlo is independent of worker count") {
  const auto cfg = config(6);
  std::mt19937_64 rng(3);
  const CVector w = random_unit(rng, 6);
  const auto r = covariance(uniform_pas(-0.2, 0.3), cfg);
  const OutageSpec s{1.0, 0.01, 4.0};
  const auto a = outage_monte_carlo(w, r, s, 20000, 5, 1);
  const auto b = outage_monte_carlo(w, r, s, 20000, 5, 3);
  CHECK(a.outages == b.outages);
  CHECK(outage_monte_carlo(w, r, s, 20000, 6).outages != a.outages);
  CHECK(outage_monte_carlo(w, r, OutageSpec{1.0, 0.01, 1e-12}, 2000, 1).estimate == 1.0);
  CHECK_THROWS_AS(outage_monte_carlo(w, r, s, 999, 1), std::invalid_argument);
}

TEST_CASE("non-PSD matrices are rejected") {
  Eigen::MatrixXcd bad = Eigen::MatrixXcd::Identity(3, 3);
  bad(2, 2) = -0.1;
  CHECK_THROWS_AS(hermitian_sqrt(bad), std::domain_error);
  Eigen::MatrixXcd noisy = Eigen::MatrixXcd::Identity(3, 3);
  noisy(2, 2) = -1e-10;
  const auto s = hermitian_sqrt(noisy);
  CHECK(std::abs(s(0, 0) - 1.0) <= 1e-12);
}

TEST_CASE("minimum power") {
  const OutageSpec s{2.0, 0.05, 1.0};
  const double ref = 3.0 / -std::log(0.95);
  CHECK(min_power_for_gain(1.0, s) == doctest::Approx(ref));
  CHECK(min_power_for_gain(2.0, s) == doctest::Approx(ref / 2));
  CHECK(std::isinf(min_power_for_gain(0.0, s)));
  double prev = 1e300;
  for (double q : {0.2, 0.5, 1.0, 1.9}) {
    CHECK(min_power_for_gain(q, s) < prev);
    prev = min_power_for_gain(q, s);
  }

  const auto cfg = config(16);
  std::mt19937_64 rng(10);
  const auto w = Beamformer::normalized(random_unit(rng, 16));
  const auto dirac = min_power(w, cfg, s, PasFamily::dirac_grid());
  double gmin = 1e9;
  for (double t : linspace(cfg.sector.lo, cfg.sector.hi, 4096)) gmin = std::min(gmin, beampattern(w, cfg, t));
  CHECK(dirac.q_star == doctest::Approx(gmin).epsilon(1e-12));
  CHECK(dirac.rho_star == doctest::Approx(min_power_for_gain(gmin, s)));

  const auto windows = min_power(w, cfg, s, PasFamily::uniform_windows(deg2rad(5)));
  CHECK(windows.q_star >= dirac.q_star);
  CHECK(windows.rho_star <= dirac.rho_star);
  CHECK_THROWS_AS(min_power(w, cfg, s, PasFamily::uniform_windows(0.0)), std::invalid_argument);
}
