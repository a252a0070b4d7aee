#include "broadbeam/papr.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <random>
#include <stdexcept>

#include <fmt/format.h>

namespace broadbeam {

namespace {

// Parlett-Reinsch balancing in place.
void balance(Eigen::MatrixXcd& a) {
  const Eigen::Index n = a.rows();
  constexpr double radix = 2.0;
  bool done = false;
  while (!done) {
    done = true;
    for (Eigen::Index i = 0; i < n; ++i) {
      double c = 0.0, r = 0.0;
      for (Eigen::Index j = 0; j < n; ++j) {
        if (j == i) continue;
        c += std::abs(a(j, i));
        r += std::abs(a(i, j));
      }
      if (c == 0.0 || r == 0.0) continue;
      double g = r / radix, f = 1.0;
      const double s = c + r;
      while (c < g) {
        f *= radix;
        c *= radix * radix;
      }
      g = r * radix;
      while (c > g) {
        f /= radix;
        c /= radix * radix;
      }
      if ((c + r) / f < 0.95 * s) {
        done = false;
        a.row(i) /= f;
        a.col(i) *= f;
      }
    }
  }
}

cdouble horner(const CVector& coeffs, cdouble x, cdouble* deriv) {
  cdouble p = 0.0, d = 0.0;
  for (Eigen::Index k = coeffs.size() - 1; k >= 0; --k) {
    d = d * x + p;
    p = p * x + coeffs[k];
  }
  if (deriv) *deriv = d;
  return p;
}

}  // namespace

double RootSet::key(cdouble x) {
  if (std::abs(x) == 0.0) return std::numeric_limits<double>::infinity();
  return std::abs(x - 1.0 / std::conj(x));
}

RootSet to_roots(const CVector& w) {
  RootSet rs;
  rs.length = static_cast<int>(w.size());
  Eigen::Index top = w.size() - 1;
  while (top >= 0 && std::abs(w[top]) <= 1e-12) --top;
  if (top < 0) throw std::domain_error("to_roots: zero polynomial");
  rs.scale = w[top];
  if (top == 0) return rs;

  const CVector monic = w.head(top + 1) / w[top];
  Eigen::MatrixXcd comp = Eigen::MatrixXcd::Zero(top, top);
  for (Eigen::Index i = 1; i < top; ++i) comp(i, i - 1) = 1.0;
  for (Eigen::Index i = 0; i < top; ++i) comp(i, top - 1) = -monic[i];
  balance(comp);
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(comp, false);
  if (es.info() != Eigen::Success) throw std::runtime_error("to_roots: eigenvalue iteration failed");

  for (Eigen::Index i = 0; i < top; ++i) {
    cdouble x = es.eigenvalues()[i];
    // Newton polish, kept only while the residual shrinks.
    for (int it = 0; it < 3; ++it) {
      cdouble d;
      const cdouble p = horner(monic, x, &d);
      if (std::abs(d) == 0.0) break;
      const cdouble next = x - p / d;
      if (!(std::abs(horner(monic, next, nullptr)) < std::abs(p))) break;
      x = next;
    }
    rs.roots.push_back(x);
  }
  std::stable_sort(rs.roots.begin(), rs.roots.end(),
                   [](cdouble a, cdouble b) { return RootSet::key(a) > RootSet::key(b); });
  return rs;
}

namespace {

// Leja order: each next root maximizes the product of distances to those
// already taken. Expanding in this order keeps the coefficients accurate.
std::vector<cdouble> leja_order(std::vector<cdouble> roots) {
  if (roots.empty()) return roots;
  auto first = std::max_element(roots.begin(), roots.end(), [](cdouble a, cdouble b) { return std::abs(a) < std::abs(b); });
  std::iter_swap(roots.begin(), first);
  std::vector<double> logprod(roots.size(), 0.0);
  for (std::size_t k = 1; k < roots.size(); ++k) {
    std::size_t pick = k;
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t i = k; i < roots.size(); ++i) {
      const double d = std::abs(roots[i] - roots[k - 1]);
      logprod[i] += d > 0.0 ? std::log(d) : -1e300;
      if (logprod[i] > best) {
        best = logprod[i];
        pick = i;
      }
    }
    std::swap(roots[k], roots[pick]);
    std::swap(logprod[k], logprod[pick]);
  }
  return roots;
}

}  // namespace

CVector from_roots(const RootSet& rs) {
  std::vector<cdouble> c{rs.scale};
  for (cdouble r : leja_order(rs.roots)) {
    std::vector<cdouble> next(c.size() + 1, 0.0);
    for (std::size_t k = 0; k < c.size(); ++k) {
      next[k + 1] += c[k];
      next[k] -= r * c[k];
    }
    c = std::move(next);
  }
  CVector out = CVector::Zero(std::max<Eigen::Index>(rs.length, static_cast<Eigen::Index>(c.size())));
  for (std::size_t k = 0; k < c.size(); ++k) out[static_cast<Eigen::Index>(k)] = c[k];
  return out;
}

CVector normalize_phase(const CVector& w) {
  Eigen::Index idx = 0;
  w.cwiseAbs().maxCoeff(&idx);
  const double mag = std::abs(w[idx]);
  if (mag == 0.0) return w;
  return w * (std::conj(w[idx]) / mag);
}

CVector flip(const RootSet& rs, std::uint64_t mask) {
  RootSet out = rs;
  for (std::size_t i = 0; i < out.roots.size() && i < 64; ++i) {
    if (!((mask >> i) & 1u)) continue;
    const cdouble x = out.roots[i];
    if (std::abs(x) <= 1e-9) throw std::domain_error(fmt::format("flip: root {} is too close to zero", i));
    out.roots[i] = 1.0 / std::conj(x);
  }
  CVector w = from_roots(out);
  const double n = w.norm();
  if (n == 0.0) throw std::domain_error("flip: degenerate polynomial");
  return normalize_phase(w / n);
}

double papr(const CVector& w) {
  const double e = w.squaredNorm();
  if (e == 0.0) throw std::domain_error("papr: zero vector");
  return static_cast<double>(w.size()) * w.cwiseAbs2().maxCoeff() / e;
}

CVector autocorrelation(const CVector& w) {
  const Eigen::Index M = w.size();
  CVector r = CVector::Zero(M);
  for (Eigen::Index k = 0; k < M; ++k)
    for (Eigen::Index m = 0; m + k < M; ++m) r[k] += w[m] * std::conj(w[m + k]);
  return r;
}

PaprSearch enumerate_flips(const CVector& w, int q, std::uint64_t seed, bool allow_large_q) {
  if (q < 0) throw std::invalid_argument("Q must be non-negative");
  if (q > kMaxEnumeratedRoots && !allow_large_q)
    throw std::invalid_argument(fmt::format("Q = {} exceeds {} without the full-search flag", q, kMaxEnumeratedRoots));
  if (q > 62) throw std::invalid_argument("Q must be at most 62");
  const RootSet rs = to_roots(w);
  const int nroots = static_cast<int>(rs.roots.size());
  if (q > nroots) throw std::invalid_argument(fmt::format("Q = {} exceeds the {} available roots", q, nroots));

  // Fixed random choice for the remaining roots.
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution coin(0.5);
  std::uint64_t fixed = 0;
  for (int i = q; i < nroots && i < 64; ++i)
    if (coin(rng) && std::abs(rs.roots[static_cast<std::size_t>(i)]) > 1e-9) fixed |= std::uint64_t{1} << i;

  PaprSearch s;
  s.original = normalize_phase(w / w.norm());
  s.original_papr = papr(s.original);
  s.best = {0, s.original, s.original_papr};
  const std::uint64_t count = std::uint64_t{1} << q;
  for (std::uint64_t m = 0; m < count; ++m) {
    const std::uint64_t mask = fixed | m;
    try {
      PaprCandidate c{mask, flip(rs, mask), 0.0};
      c.papr = papr(c.weights);
      if (c.papr < s.best.papr) s.best = c;
      s.candidates.push_back(std::move(c));
    } catch (const std::domain_error&) {
      ++s.skipped;
    }
  }
  if (s.candidates.empty()) throw std::domain_error("enumerate_flips: every mask was skipped");
  return s;
}

PaprCandidate search_min_papr(const CVector& w, int q, std::uint64_t seed) {
  return enumerate_flips(w, q, seed).best;
}

void write_candidates_csv(std::ostream& os, const PaprSearch& s) {
  os << "candidate_index,flip_mask_hex,papr\n";
  os << fmt::format("1,original,{:.17g}\n", s.original_papr);
  for (std::size_t i = 0; i < s.candidates.size(); ++i)
    os << fmt::format("{},{:016x},{:.17g}\n", i + 2, s.candidates[i].flip_mask, s.candidates[i].papr);
}

}  // namespace broadbeam
