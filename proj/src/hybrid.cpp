#include "broadbeam/hybrid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

namespace broadbeam {

Eigen::MatrixXd HybridFactorization::phases() const { return analog.array().arg().matrix(); }

std::vector<double> sum_of_unit_phasors(cdouble c, int n) {
  if (n < 1) throw std::invalid_argument("sum_of_unit_phasors: need at least one phasor");
  if (std::abs(c) > n + 1e-12)
    throw std::domain_error(fmt::format("sum_of_unit_phasors: |c| = {} exceeds {}", std::abs(c), n));
  std::vector<double> out;
  if (n == 1) {
    if (std::abs(std::abs(c) - 1.0) > 1e-12) throw std::domain_error("sum_of_unit_phasors: |c| must be 1 for one phasor");
    out.push_back(std::arg(c));
    return out;
  }
  cdouble rest = c;
  // Each peel keeps |rest| <= remaining count: ||c| - 1| <= n - 1 when |c| <= n.
  for (int left = n; left > 2; --left) {
    out.push_back(std::abs(rest) == 0.0 ? 0.0 : std::arg(rest));
    rest -= std::polar(1.0, out.back());
  }
  const double mag = std::abs(rest);
  const double ref = mag == 0.0 ? 0.0 : std::arg(rest);
  const double half = std::acos(std::clamp(mag / 2.0, 0.0, 1.0));
  out.push_back(ref + half);
  out.push_back(ref - half);
  return out;
}

HybridFactorization decompose(const CVector& w, int rf_chains) {
  if (rf_chains < 1) throw std::invalid_argument("rf_chains must be at least 1");
  const Eigen::Index M = w.size();
  if (M == 0) throw std::invalid_argument("decompose: empty beamformer");
  HybridFactorization h;
  h.target = w;
  h.b = w.cwiseAbs().maxCoeff() / rf_chains;
  if (h.b == 0.0) throw std::domain_error("decompose: zero beamformer");
  h.baseband = CVector::Constant(rf_chains, h.b);
  h.analog.resize(M, rf_chains);
  for (Eigen::Index i = 0; i < M; ++i) {
    const cdouble c = w[i] / h.b;
    if (rf_chains == 1 && std::abs(std::abs(c) - 1.0) > 1e-12)
      throw std::domain_error(fmt::format("decompose: one RF chain needs constant modulus, antenna {} differs", i));
    const auto phis = sum_of_unit_phasors(c, rf_chains);
    for (int j = 0; j < rf_chains; ++j) h.analog(i, j) = std::polar(1.0, phis[static_cast<std::size_t>(j)]);
  }
  return h;
}

}  // namespace broadbeam
