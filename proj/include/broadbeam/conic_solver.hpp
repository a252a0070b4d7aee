#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace broadbeam::conic {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

enum class ConeKind {
  nonneg,       ///< every row of (A x + b) >= 0
  soc,          ///< ||(A x + b)[1:]|| <= (A x + b)[0]
  rotated_soc,  ///< ||(A x + b)[2:]||^2 <= (A x + b)[0] * (A x + b)[1], both >= 0
};

/// Affine expression A x + b constrained to lie in a cone.
struct ConeConstraint {
  ConeKind kind = ConeKind::nonneg;
  Matrix rows;
  Vector offset;
};

/// minimize c^T x subject to a list of conic constraints on affine maps of x.
class ConeProgram {
 public:
  explicit ConeProgram(Vector objective);

  int dimension() const { return static_cast<int>(objective_.size()); }
  const Vector& objective() const { return objective_; }
  const std::vector<ConeConstraint>& constraints() const { return constraints_; }

  /// Throws std::invalid_argument on column-count or size mismatch.
  void add(ConeKind kind, Matrix rows, Vector offset);
  void add_nonneg(Matrix rows, Vector offset) { add(ConeKind::nonneg, std::move(rows), std::move(offset)); }
  void add_soc(Matrix rows, Vector offset) { add(ConeKind::soc, std::move(rows), std::move(offset)); }
  void add_rotated_soc(Matrix rows, Vector offset) {
    add(ConeKind::rotated_soc, std::move(rows), std::move(offset));
  }

 private:
  Vector objective_;
  std::vector<ConeConstraint> constraints_;
};

enum class SolveStatus { optimal, infeasible, unbounded, max_iterations };

const char* to_string(SolveStatus s);

struct Residuals {
  double primal = 0.0;  ///< largest cone violation of the returned point
  double dual = 0.0;    ///< ||c - sum_i A_i^T y_i||_inf / (1 + ||c||_inf) plus dual cone violation
  double gap = 0.0;     ///< |primal objective - dual objective| / (1 + |primal objective|)
};

struct ConeSolution {
  SolveStatus status = SolveStatus::max_iterations;
  Vector primal;
  /// One multiplier block per constraint, in the constraint's own coordinates:
  /// c = sum_i A_i^T y_i at optimality.
  std::vector<Vector> dual;
  double primal_objective = 0.0;
  double dual_objective = 0.0;
  Residuals residuals;
  int iterations = 0;
};

struct SolverOptions {
  double tol = 1e-7;
  int max_iter = 20000;
};

/// Homogeneous self-dual primal-dual interior-point method with
/// Nesterov-Todd scaling and Mehrotra correction. Deterministic.
ConeSolution solve(const ConeProgram& p, const SolverOptions& opts = {});

/// Largest violation of any constraint at x (0 when feasible).
double max_violation(const ConeProgram& p, const Vector& x);

/// Text dump, one constraint per line:
///   program <n> <constraint count>
///   objective c_1 ... c_n
///   <kind> <rows> | a_11 ... a_1n ; a_21 ... | b_1 ... b_k
void write_text(std::ostream& os, const ConeProgram& p);
ConeProgram read_text(std::istream& is);

}  // namespace broadbeam::conic
