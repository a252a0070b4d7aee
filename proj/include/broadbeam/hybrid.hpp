#pragma once

#include <vector>

#include "broadbeam/array_geometry.hpp"

namespace broadbeam {

/// w = analog * baseband with unit-modulus analog entries and a baseband
/// vector whose entries all equal b = max_i |w_i| / N_RF.
struct HybridFactorization {
  Eigen::MatrixXcd analog;  ///< M x N_RF
  CVector baseband;         ///< N_RF
  double b = 0.0;
  CVector target;

  CVector reconstruct() const { return analog * baseband; }
  /// Phases of the analog matrix in radians, M x N_RF.
  Eigen::MatrixXd phases() const;
};

/// Angles phi_j with sum_j exp(j phi_j) = c. Requires |c| <= n + 1e-12 and n >= 1.
std::vector<double> sum_of_unit_phasors(cdouble c, int n);

/// Throws std::invalid_argument for N_RF < 1, and std::domain_error for
/// N_RF = 1 unless every |w_i| equals b.
HybridFactorization decompose(const CVector& w, int rf_chains);

}  // namespace broadbeam
