#include <cmath>
#include <random>

#include "doctest.h"

#include "broadbeam/array_geometry.hpp"

using namespace broadbeam;

namespace {

ArrayConfig standard(int m, double d = 0.5) {
  return make_array_config(m, d, {-kPi / 2, kPi / 2}, {deg2rad(-30), deg2rad(30)});
}

CVector random_unit(std::mt19937_64& rng, int m) {
  std::normal_distribution<double> g;
  CVector w(m);
  for (int i = 0; i < m; ++i) w[i] = {g(rng), g(rng)};
  return w / w.norm();
}

}  // namespace

TEST_CASE("steering vector entries") {
  const auto a = steering_vector(standard(4), 0.0);
  for (int m = 0; m < 4; ++m) CHECK(std::abs(a[m] - cdouble(1.0, 0.0)) < 1e-15);

  const auto b = steering_vector(standard(2), kPi / 2);
  CHECK(std::abs(b[0] - cdouble(1.0, 0.0)) < 1e-15);
  CHECK(std::abs(b[1] - cdouble(-1.0, 0.0)) < 1e-15);

  const auto c = steering_vector(make_array_config(3, 0.25, {-kPi / 2, kPi / 2}, {-0.5, 0.5}), kPi / 6);
  CHECK(std::abs(c[1] - std::polar(1.0, -kPi / 4)) < 1e-15);
  CHECK(std::abs(c[2] - std::polar(1.0, -kPi / 2)) < 1e-15);

  CHECK_THROWS_AS(steering_vector(make_array_config(4, 0.5, {-1.0, 1.0}, {-0.5, 0.5}), 1.2), std::domain_error);
}

TEST_CASE("beampattern reference values") {
  const auto cfg = standard(64);
  const auto uniform = Beamformer::normalized(CVector::Ones(64));
  CHECK(beampattern(uniform, cfg, 0.0) == doctest::Approx(64.0).epsilon(1e-12));

  CVector e1 = CVector::Zero(64);
  e1[0] = 1.0;
  const auto single = Beamformer::from_unit(e1);
  for (double th : {-1.2, -0.3, 0.0, 0.7, 1.5}) CHECK(beampattern(single, cfg, th) == doctest::Approx(1.0));

  const std::vector<double> xs{-1.0, -0.4, 0.0, 0.3, 1.0};
  const auto g = beampattern_grid(single, cfg, xs);
  for (int i = 0; i < 5; ++i) CHECK(g[i] == doctest::Approx(1.0));

  const auto pair = Beamformer::normalized(CVector::Ones(2));
  const auto cfg2 = standard(2);
  const std::vector<double> x01{0.0, 1.0};
  const auto g2 = beampattern_grid(pair, cfg2, x01);
  CHECK(g2[0] == doctest::Approx(2.0));
  CHECK(std::abs(g2[1]) < 1e-15);

  const std::vector<double> outside{1.2};
  CHECK_THROWS_AS(beampattern_grid(pair, cfg2, outside), std::domain_error);
}

TEST_CASE("Parseval: full-band integral of a unit beamformer is 1/D") {
  std::mt19937_64 rng(11);
  const auto cfg = make_array_config(16, 0.5, {-kPi / 2, kPi / 2}, {-kPi / 2, kPi / 2});
  for (int t = 0; t < 5; ++t) {
    const auto w = Beamformer::from_unit(random_unit(rng, 16));
    const auto xs = linspace(-1.0, 1.0, 4097);
    const auto g = beampattern_grid(w, cfg, xs);
    const double integral = trapezoid(std::span<const double>(g.data(), g.size()), 2.0 / 4096);
    CHECK(integral == doctest::Approx(2.0).epsilon(1e-3));
  }
}

TEST_CASE("beampattern invariants") {
  std::mt19937_64 rng(5);
  const auto cfg = standard(12);
  std::uniform_real_distribution<double> angle(-kPi / 2, kPi / 2);
  const CVector w = random_unit(rng, 12);
  const auto bf = Beamformer::from_unit(w);
  const auto rotated = Beamformer::from_unit(w * std::polar(1.0, 0.83));
  for (int i = 0; i < 100; ++i) {
    const double th = angle(rng);
    const double matrix_form = beampattern(bf, cfg, th);
    const double dtft_form = pattern_at(w, cfg.spacing, std::sin(th));
    CHECK(std::abs(matrix_form - dtft_form) <= 1e-10);
    CHECK(std::abs(beampattern(rotated, cfg, th) - matrix_form) <= 1e-12);
  }
}

TEST_CASE("array configuration validation") {
  CHECK_NOTHROW(make_array_config(8, 1.0, {-kPi / 6, kPi / 6}, {-kPi / 6, 0.0}));
  CHECK_THROWS_AS(make_array_config(8, 1.0, {-kPi / 2, kPi / 2}, {-0.1, 0.1}), std::invalid_argument);
  CHECK_THROWS_AS(make_array_config(8, 0.5, {-kPi / 2, kPi / 2}, {0.2, 0.1}), std::invalid_argument);
  CHECK_THROWS_AS(make_array_config(8, -0.5, {-kPi / 2, kPi / 2}, {-0.1, 0.1}), std::invalid_argument);
  CHECK_THROWS_AS(make_array_config(0, 0.5, {-kPi / 2, kPi / 2}, {-0.1, 0.1}), std::invalid_argument);
  CHECK_THROWS_AS(make_array_config(8, 0.5, {-1.0, 1.0}, {-1.2, 0.1}), std::invalid_argument);
}

TEST_CASE("band classification and transition width") {
  const auto cfg = standard(64);
  const double width = angular_to_spatial_width(cfg, deg2rad(4.0));
  CHECK(width == doctest::Approx(std::sin(deg2rad(34.0)) - 0.5));
  const auto band = make_band(cfg, width);
  using R = SpatialFrequencyBand::Region;
  CHECK(band.classify(0.0) == R::pass);
  CHECK(band.classify(band.pass_hi) == R::pass);
  CHECK(band.classify(0.5 + width / 2) == R::transition);
  CHECK(band.classify(0.5 + width) == R::stop);
  CHECK(band.classify(-0.9) == R::stop);
  CHECK(band.has_stop());

  const auto full = make_array_config(8, 0.5, {-kPi / 2, kPi / 2}, {-kPi / 2, kPi / 2});
  CHECK(angular_to_spatial_width(full, 0.1) == 0.0);
  CHECK_FALSE(make_band(full, 0.3).has_stop());
}
