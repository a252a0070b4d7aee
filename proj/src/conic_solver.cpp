#include "broadbeam/conic_solver.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace broadbeam::conic {

ConeProgram::ConeProgram(Vector objective) : objective_(std::move(objective)) {
  if (objective_.size() == 0) throw std::invalid_argument("cone program: empty objective");
}

void ConeProgram::add(ConeKind kind, Matrix rows, Vector offset) {
  if (rows.cols() != objective_.size())
    throw std::invalid_argument("cone constraint: column count does not match variable dimension");
  if (rows.rows() != offset.size()) throw std::invalid_argument("cone constraint: offset size mismatch");
  if (rows.rows() == 0) throw std::invalid_argument("cone constraint: no rows");
  if (kind == ConeKind::rotated_soc && rows.rows() < 2)
    throw std::invalid_argument("rotated cone constraint needs at least two rows");
  constraints_.push_back({kind, std::move(rows), std::move(offset)});
}

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::optimal: return "optimal";
    case SolveStatus::infeasible: return "infeasible";
    case SolveStatus::unbounded: return "unbounded";
    case SolveStatus::max_iterations: return "max-iterations";
  }
  return "unknown";
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// One block of the standard cone: nonnegative orthant or Lorentz cone.
struct Block {
  bool soc = false;
  Eigen::Index start = 0;
  Eigen::Index dim = 0;
};

// G x + s = h, s in K.
struct StandardForm {
  Matrix G;
  Vector h;
  std::vector<Block> blocks;
  std::vector<std::size_t> owner;  // user constraint index per block
  int degree = 0;
};

StandardForm standardize(const ConeProgram& p) {
  Eigen::Index m = 0;
  for (const auto& c : p.constraints()) m += c.rows.rows();
  StandardForm sf;
  sf.G.setZero(m, p.dimension());
  sf.h.setZero(m);
  Eigen::Index r = 0;
  for (std::size_t i = 0; i < p.constraints().size(); ++i) {
    const auto& c = p.constraints()[i];
    const Eigen::Index k = c.rows.rows();
    switch (c.kind) {
      case ConeKind::nonneg:
        sf.G.middleRows(r, k) = -c.rows;
        sf.h.segment(r, k) = c.offset;
        sf.blocks.push_back({false, r, k});
        sf.degree += static_cast<int>(k);
        break;
      case ConeKind::soc:
        sf.G.middleRows(r, k) = -c.rows;
        sf.h.segment(r, k) = c.offset;
        sf.blocks.push_back({k > 1, r, k});
        sf.degree += 1;
        break;
      case ConeKind::rotated_soc:
        // y z >= ||v||^2  <=>  ||(y - z, 2 v)|| <= y + z
        sf.G.row(r) = -(c.rows.row(0) + c.rows.row(1));
        sf.G.row(r + 1) = -(c.rows.row(0) - c.rows.row(1));
        sf.G.middleRows(r + 2, k - 2) = -2.0 * c.rows.bottomRows(k - 2);
        sf.h[r] = c.offset[0] + c.offset[1];
        sf.h[r + 1] = c.offset[0] - c.offset[1];
        sf.h.segment(r + 2, k - 2) = 2.0 * c.offset.tail(k - 2);
        sf.blocks.push_back({true, r, k});
        sf.degree += 1;
        break;
    }
    sf.owner.push_back(i);
    r += k;
  }
  return sf;
}

double soc_det(double u0, double tail_norm) { return (u0 - tail_norm) * (u0 + tail_norm); }

// Distance outside the cone along the identity direction; <= 0 means inside.
double cone_excess(const StandardForm& sf, const Vector& u) {
  double worst = -kInf;
  for (const auto& b : sf.blocks) {
    auto seg = u.segment(b.start, b.dim);
    if (b.soc)
      worst = std::max(worst, seg.tail(b.dim - 1).norm() - seg[0]);
    else
      worst = std::max(worst, -seg.minCoeff());
  }
  return worst;
}

bool strictly_interior(const StandardForm& sf, const Vector& u) {
  for (const auto& b : sf.blocks) {
    auto seg = u.segment(b.start, b.dim);
    if (b.soc) {
      if (!(seg[0] > 0.0) || !(soc_det(seg[0], seg.tail(b.dim - 1).norm()) > 0.0)) return false;
    } else if (!(seg.minCoeff() > 0.0)) {
      return false;
    }
  }
  return true;
}

void add_identity(const StandardForm& sf, Vector& u, double t) {
  for (const auto& b : sf.blocks) {
    if (b.soc)
      u[b.start] += t;
    else
      u.segment(b.start, b.dim).array() += t;
  }
}

Vector identity(const StandardForm& sf, Eigen::Index m) {
  Vector e = Vector::Zero(m);
  add_identity(sf, e, 1.0);
  return e;
}

// Jordan product u o w.
Vector cone_prod(const StandardForm& sf, const Vector& u, const Vector& w) {
  Vector out(u.size());
  for (const auto& b : sf.blocks) {
    auto us = u.segment(b.start, b.dim);
    auto ws = w.segment(b.start, b.dim);
    if (b.soc) {
      out[b.start] = us.dot(ws);
      out.segment(b.start + 1, b.dim - 1) = us[0] * ws.tail(b.dim - 1) + ws[0] * us.tail(b.dim - 1);
    } else {
      out.segment(b.start, b.dim) = us.cwiseProduct(ws);
    }
  }
  return out;
}

// Solves lambda o x = d for x.
Vector cone_div(const StandardForm& sf, const Vector& lambda, const Vector& d) {
  Vector out(d.size());
  for (const auto& b : sf.blocks) {
    auto l = lambda.segment(b.start, b.dim);
    auto ds = d.segment(b.start, b.dim);
    if (b.soc) {
      const double det = soc_det(l[0], l.tail(b.dim - 1).norm());
      const double x0 = (l[0] * ds[0] - l.tail(b.dim - 1).dot(ds.tail(b.dim - 1))) / det;
      out[b.start] = x0;
      out.segment(b.start + 1, b.dim - 1) = (ds.tail(b.dim - 1) - x0 * l.tail(b.dim - 1)) / l[0];
    } else {
      out.segment(b.start, b.dim) = ds.cwiseQuotient(l);
    }
  }
  return out;
}

// Nesterov-Todd scaling W with W z = W^{-1} s = lambda. For a Lorentz block
// W = beta (2 v v^T - J); for an orthant block W = diag(sqrt(s / z)).
struct Scaling {
  std::vector<double> beta;
  std::vector<Vector> v;  // Lorentz: v; orthant: the diagonal
};

Scaling compute_scaling(const StandardForm& sf, const Vector& s, const Vector& z) {
  Scaling w;
  w.beta.resize(sf.blocks.size());
  w.v.resize(sf.blocks.size());
  for (std::size_t i = 0; i < sf.blocks.size(); ++i) {
    const auto& b = sf.blocks[i];
    auto ss = s.segment(b.start, b.dim);
    auto zs = z.segment(b.start, b.dim);
    if (!b.soc) {
      w.v[i] = (ss.array() / zs.array()).sqrt();
      w.beta[i] = 1.0;
      continue;
    }
    const double sdet = soc_det(ss[0], ss.tail(b.dim - 1).norm());
    const double zdet = soc_det(zs[0], zs.tail(b.dim - 1).norm());
    const Vector sbar = ss / std::sqrt(sdet);
    const Vector zbar = zs / std::sqrt(zdet);
    const double gamma = std::sqrt(0.5 * (1.0 + sbar.dot(zbar)));
    Vector wbar(b.dim);
    wbar[0] = (sbar[0] + zbar[0]) / (2.0 * gamma);
    wbar.tail(b.dim - 1) = (sbar.tail(b.dim - 1) - zbar.tail(b.dim - 1)) / (2.0 * gamma);
    Vector v = wbar;
    v[0] += 1.0;
    v /= std::sqrt(2.0 * (wbar[0] + 1.0));
    w.v[i] = std::move(v);
    w.beta[i] = std::pow(sdet / zdet, 0.25);
  }
  return w;
}

// Applies W (inverse = false) or W^{-1} to every column of a row block.
template <typename Derived>
void apply_block(const Block& b, double beta, const Vector& v, bool inverse, Eigen::MatrixBase<Derived>& u) {
  if (!b.soc) {
    if (inverse)
      u.array().colwise() /= v.array();
    else
      u.array().colwise() *= v.array();
    return;
  }
  // J-conjugated v for the inverse: W^{-1} = (2 J v v^T J - J) / beta.
  Vector jv = v;
  if (inverse) jv.tail(b.dim - 1) *= -1.0;
  const Eigen::RowVectorXd proj = jv.transpose() * u;
  u.row(0) *= -1.0;  // -J u
  u += 2.0 * jv * proj;
  u *= inverse ? 1.0 / beta : beta;
}

void apply_scaling(const StandardForm& sf, const Scaling& w, bool inverse, Matrix& u) {
  for (std::size_t i = 0; i < sf.blocks.size(); ++i) {
    const auto& b = sf.blocks[i];
    auto rows = u.middleRows(b.start, b.dim);
    apply_block(b, w.beta[i], w.v[i], inverse, rows);
  }
}

Vector scaled(const StandardForm& sf, const Scaling& w, bool inverse, const Vector& u) {
  Matrix m = u;
  apply_scaling(sf, w, inverse, m);
  return m.col(0);
}

// Largest t with u + t d in the cone, for u in the interior.
double max_step(const StandardForm& sf, const Vector& u, const Vector& d) {
  double best = kInf;
  for (const auto& b : sf.blocks) {
    auto us = u.segment(b.start, b.dim);
    auto ds = d.segment(b.start, b.dim);
    if (!b.soc) {
      for (Eigen::Index k = 0; k < b.dim; ++k)
        if (ds[k] < 0.0) best = std::min(best, -us[k] / ds[k]);
      continue;
    }
    const auto u1 = us.tail(b.dim - 1);
    const auto d1 = ds.tail(b.dim - 1);
    const double a = ds[0] * ds[0] - d1.squaredNorm();
    const double h = us[0] * ds[0] - u1.dot(d1);
    const double c = soc_det(us[0], u1.norm());
    if (ds[0] < 0.0) best = std::min(best, -us[0] / ds[0]);
    // Roots of a t^2 + 2 h t + c.
    if (a == 0.0) {
      if (h < 0.0) best = std::min(best, -c / (2.0 * h));
      continue;
    }
    const double disc = h * h - a * c;
    if (disc < 0.0) continue;
    const double q = -(h + std::copysign(std::sqrt(disc), h));
    for (double t : {q / a, q != 0.0 ? c / q : kInf})
      if (t > 0.0) best = std::min(best, t);
  }
  return best;
}

Vector block_dual_user(const ConeConstraint& c, const Vector& z) {
  if (c.kind != ConeKind::rotated_soc) return z;
  // T^T z for s_std = T s_user.
  Vector y(z.size());
  y[0] = z[0] + z[1];
  y[1] = z[0] - z[1];
  y.tail(z.size() - 2) = 2.0 * z.tail(z.size() - 2);
  return y;
}

double constraint_violation(const ConeConstraint& c, const Vector& x) {
  const Vector u = c.rows * x + c.offset;
  const Eigen::Index k = u.size();
  switch (c.kind) {
    case ConeKind::nonneg: return std::max(0.0, -u.minCoeff());
    case ConeKind::soc: return k == 1 ? std::max(0.0, -u[0]) : std::max(0.0, u.tail(k - 1).norm() - u[0]);
    case ConeKind::rotated_soc: {
      const double lorentz = std::hypot(u[0] - u[1], 2.0 * u.tail(k - 2).norm()) - (u[0] + u[1]);
      return std::max({0.0, -u[0], -u[1], 0.5 * lorentz});
    }
  }
  return 0.0;
}

}  // namespace

double max_violation(const ConeProgram& p, const Vector& x) {
  double worst = 0.0;
  for (const auto& c : p.constraints()) worst = std::max(worst, constraint_violation(c, x));
  return worst;
}

ConeSolution solve(const ConeProgram& p, const SolverOptions& opts) {
  if (!(opts.tol > 0.0)) throw std::invalid_argument("solve: tolerance must be positive");
  const StandardForm sf = standardize(p);
  const Matrix& G = sf.G;
  const Vector& h = sf.h;
  const Vector& c = p.objective();
  const Eigen::Index n = G.cols();
  const Eigen::Index m = G.rows();
  const double hnorm = std::max(1.0, h.norm());
  const double cnorm = std::max(1.0, c.norm());

  ConeSolution out;
  if (m == 0) throw std::invalid_argument("solve: program has no constraints");

  auto factor = [n](const Matrix& gs) {
    Matrix H = Matrix::Zero(n, n);
    H.selfadjointView<Eigen::Lower>().rankUpdate(gs.transpose());
    H = H.selfadjointView<Eigen::Lower>();
    Eigen::LLT<Matrix> llt(H);
    double jitter = 1e-13 * std::max(1.0, H.diagonal().maxCoeff());
    while (llt.info() != Eigen::Success && jitter < 1e6) {
      llt.compute(H + jitter * Matrix::Identity(n, n));
      jitter *= 100.0;
    }
    return llt;
  };

  // Starting point: least-squares primal and minimum-norm dual, pushed into the cone.
  Vector x, s, z;
  {
    const auto llt = factor(G);
    x = llt.solve(G.transpose() * h);
    s = h - G * x;
    z = -G * llt.solve(c);
    const double ts = cone_excess(sf, s);
    if (ts >= -1e-8 * std::max(1.0, s.norm())) add_identity(sf, s, 1.0 + ts);
    const double tz = cone_excess(sf, z);
    if (tz >= -1e-8 * std::max(1.0, z.norm())) add_identity(sf, z, 1.0 + tz);
  }
  double tau = 1.0, kappa = 1.0;
  const Vector e = identity(sf, m);

  auto finish = [&](SolveStatus status, int iters) {
    out.status = status;
    out.iterations = iters;
    const double scale = (status == SolveStatus::infeasible || status == SolveStatus::unbounded) ? 1.0 : tau;
    out.primal = x / scale;
    const Vector zs = z / scale;
    out.dual.clear();
    Vector resid = c;
    double dual_obj = 0.0;
    double dual_cone = std::max(0.0, cone_excess(sf, zs));
    for (std::size_t i = 0; i < sf.blocks.size(); ++i) {
      const auto& b = sf.blocks[i];
      const auto& con = p.constraints()[sf.owner[i]];
      Vector y = block_dual_user(con, zs.segment(b.start, b.dim));
      resid -= con.rows.transpose() * y;
      dual_obj -= con.offset.dot(y);
      out.dual.push_back(std::move(y));
    }
    out.primal_objective = c.dot(out.primal);
    out.dual_objective = dual_obj;
    out.residuals.primal = max_violation(p, out.primal);
    out.residuals.dual = resid.lpNorm<Eigen::Infinity>() / (1.0 + c.lpNorm<Eigen::Infinity>()) + dual_cone;
    out.residuals.gap = std::abs(out.primal_objective - out.dual_objective) / (1.0 + std::abs(out.primal_objective));
    return out;
  };

  // Keeps the last iterate, promoting it to optimal when it already meets tol.
  Vector best_x = x, best_s = s, best_z = z;
  double best_tau = tau, best_kappa = kappa, best_merit = kInf;
  auto breakdown = [&](int iters) {
    if (std::isfinite(best_merit)) {
      x = best_x;
      s = best_s;
      z = best_z;
      tau = best_tau;
      kappa = best_kappa;
    }
    finish(SolveStatus::max_iterations, iters);
    const auto& r = out.residuals;
    if (r.primal <= opts.tol && r.dual <= opts.tol && r.gap <= opts.tol) out.status = SolveStatus::optimal;
    return out;
  };

  int stalls = 0;
  for (int iter = 0; iter < opts.max_iter; ++iter) {
    const Vector rx = G.transpose() * z + c * tau;
    const Vector rz = G * x + s - h * tau;
    const double cx = c.dot(x), hz = h.dot(z);
    const double rt = kappa + cx + hz;
    const double sz = s.dot(z);

    const double pres = rz.norm() / tau / hnorm;
    const double dres = rx.norm() / tau / cnorm;
    const double pcost = cx / tau, dcost = -hz / tau;
    const double scale_obj = 1.0 + std::abs(pcost);
    const double merit = std::max({pres, dres, std::abs(pcost - dcost) / scale_obj});
    if (merit < best_merit) {
      best_merit = merit;
      best_x = x;
      best_s = s;
      best_z = z;
      best_tau = tau;
      best_kappa = kappa;
    }
    if (pres <= opts.tol * 0.1 && dres <= opts.tol * 0.1 && sz / (tau * tau) <= opts.tol * 0.1 * scale_obj &&
        std::abs(pcost - dcost) <= opts.tol * 0.1 * scale_obj) {
      finish(SolveStatus::optimal, iter);
      const auto& r = out.residuals;
      if (r.primal <= opts.tol && r.dual <= opts.tol && r.gap <= opts.tol) return out;
    }
    if (hz < 0.0) {
      const double pinf = (G.transpose() * z).norm() / cnorm / -hz;
      if (pinf <= opts.tol) return finish(SolveStatus::infeasible, iter);
    }
    if (cx < 0.0) {
      const double dinf = (G * x + s).norm() / hnorm / -cx;
      if (dinf <= opts.tol) return finish(SolveStatus::unbounded, iter);
    }

    const double mu = (sz + tau * kappa) / (sf.degree + 1);
    const Scaling W = compute_scaling(sf, s, z);
    const Vector lambda = scaled(sf, W, false, z);
    Matrix Gs = G;
    apply_scaling(sf, W, true, Gs);
    const auto llt = factor(Gs);

    // Solves [0 Gs^T; Gs -I][x; zt] = [bx; bzs] with one refinement pass.
    auto kkt = [&](const Vector& bx, const Vector& bzs) {
      Vector xs = llt.solve(bx + Gs.transpose() * bzs);
      Vector zt = Gs * xs - bzs;
      const Vector r1 = bx - Gs.transpose() * zt;
      const Vector r2 = bzs - Gs * xs + zt;
      const Vector dx = llt.solve(r1 + Gs.transpose() * r2);
      xs += dx;
      zt += Gs * dx - r2;
      return std::pair{xs, zt};
    };

    const Vector hs = scaled(sf, W, true, h);
    const auto [x1, zt1] = kkt(-c, hs);
    const double denom = -zt1.squaredNorm() - kappa / tau;

    struct Direction {
      Vector dx, dzt, dst;
      double dtau, dkappa;
    };
    auto direction = [&](double gamma, const Vector& ds_c, double dk_c) {
      const Vector bx = -(1.0 - gamma) * rx;
      const Vector bzs = scaled(sf, W, true, Vector(-(1.0 - gamma) * rz));
      const double bt = -(1.0 - gamma) * rt;
      const Vector q = cone_div(sf, lambda, ds_c);
      const auto [x0, zt0] = kkt(bx, Vector(bzs - q));
      Direction d;
      d.dtau = (bt - c.dot(x0) - hs.dot(zt0) - dk_c / tau) / denom;
      d.dx = x0 + d.dtau * x1;
      d.dzt = zt0 + d.dtau * zt1;
      d.dkappa = (dk_c - kappa * d.dtau) / tau;
      d.dst = q - d.dzt;
      return d;
    };
    auto step_length = [&](const Direction& d) {
      double a = std::min(max_step(sf, lambda, d.dst), max_step(sf, lambda, d.dzt));
      if (d.dtau < 0.0) a = std::min(a, -tau / d.dtau);
      if (d.dkappa < 0.0) a = std::min(a, -kappa / d.dkappa);
      return a;
    };

    const Vector ll = cone_prod(sf, lambda, lambda);
    const Direction aff = direction(0.0, -ll, -tau * kappa);
    const double a_aff = std::min(1.0, step_length(aff));
    const double sigma = std::pow(1.0 - a_aff, 3);

    const Vector ds_c = -ll - cone_prod(sf, aff.dst, aff.dzt) + sigma * mu * e;
    const double dk_c = -tau * kappa - aff.dtau * aff.dkappa + sigma * mu;
    const Direction dir = direction(sigma, ds_c, dk_c);
    const double alpha = std::min(1.0, 0.99 * step_length(dir));

    if (!std::isfinite(alpha) || alpha < 1e-12) {
      if (++stalls > 5) return breakdown(iter);
    } else {
      stalls = 0;
    }
    Vector xn = x + alpha * dir.dx;
    Vector sn = s + alpha * scaled(sf, W, false, dir.dst);
    Vector zn = z + alpha * scaled(sf, W, true, dir.dzt);
    const double taun = tau + alpha * dir.dtau;
    const double kappan = kappa + alpha * dir.dkappa;
    // Rounding can push a nearly converged iterate onto the cone boundary.
    if (!xn.allFinite() || !sn.allFinite() || !zn.allFinite() || !(taun > 0.0) || !(kappan >= 0.0) ||
        !strictly_interior(sf, sn) || !strictly_interior(sf, zn))
      return breakdown(iter);
    x = std::move(xn);
    s = std::move(sn);
    z = std::move(zn);
    tau = taun;
    kappa = kappan;
  }
  return breakdown(opts.max_iter);
}

namespace {

const char* kind_name(ConeKind k) {
  switch (k) {
    case ConeKind::nonneg: return "nonneg";
    case ConeKind::soc: return "soc";
    case ConeKind::rotated_soc: return "rsoc";
  }
  return "?";
}

ConeKind parse_kind(const std::string& s) {
  if (s == "nonneg") return ConeKind::nonneg;
  if (s == "soc") return ConeKind::soc;
  if (s == "rsoc") return ConeKind::rotated_soc;
  throw std::invalid_argument("cone program text: unknown cone kind '" + s + "'");
}

}  // namespace

void write_text(std::ostream& os, const ConeProgram& p) {
  const auto old_prec = os.precision(17);
  os << "program " << p.dimension() << ' ' << p.constraints().size() << '\n';
  os << "objective";
  for (Eigen::Index i = 0; i < p.objective().size(); ++i) os << ' ' << p.objective()[i];
  os << '\n';
  for (const auto& c : p.constraints()) {
    os << kind_name(c.kind) << ' ' << c.rows.rows() << " |";
    for (Eigen::Index r = 0; r < c.rows.rows(); ++r) {
      if (r > 0) os << " ;";
      for (Eigen::Index k = 0; k < c.rows.cols(); ++k) os << ' ' << c.rows(r, k);
    }
    os << " |";
    for (Eigen::Index r = 0; r < c.offset.size(); ++r) os << ' ' << c.offset[r];
    os << '\n';
  }
  os.precision(old_prec);
}

ConeProgram read_text(std::istream& is) {
  std::string tag;
  int n = 0;
  std::size_t count = 0;
  if (!(is >> tag >> n >> count) || tag != "program" || n <= 0)
    throw std::invalid_argument("cone program text: bad header");
  if (!(is >> tag) || tag != "objective") throw std::invalid_argument("cone program text: missing objective");
  Vector c(n);
  for (int i = 0; i < n; ++i)
    if (!(is >> c[i])) throw std::invalid_argument("cone program text: short objective");
  ConeProgram p(std::move(c));
  for (std::size_t k = 0; k < count; ++k) {
    std::string kind, bar;
    Eigen::Index rows = 0;
    if (!(is >> kind >> rows >> bar) || bar != "|" || rows <= 0)
      throw std::invalid_argument("cone program text: bad constraint header");
    Matrix a(rows, n);
    for (Eigen::Index r = 0; r < rows; ++r) {
      if (r > 0 && (!(is >> bar) || bar != ";")) throw std::invalid_argument("cone program text: missing ';'");
      for (int j = 0; j < n; ++j)
        if (!(is >> a(r, j))) throw std::invalid_argument("cone program text: short row");
    }
    if (!(is >> bar) || bar != "|") throw std::invalid_argument("cone program text: missing offset separator");
    Vector b(rows);
    for (Eigen::Index r = 0; r < rows; ++r)
      if (!(is >> b[r])) throw std::invalid_argument("cone program text: short offset");
    p.add(parse_kind(kind), std::move(a), std::move(b));
  }
  return p;
}

}  // namespace broadbeam::conic
