#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "broadbeam/array_geometry.hpp"

namespace broadbeam {

/// Roots of w_0 + w_1 x + ... + w_{M-1} x^{M-1}, ordered by |x - 1/x^*|
/// decreasing, with the leading coefficient kept as `scale`.
struct RootSet {
  std::vector<cdouble> roots;
  cdouble scale{1.0, 0.0};
  int length = 0;  ///< number of coefficients of the source polynomial

  static double key(cdouble x);
};

RootSet to_roots(const CVector& w);

/// Coefficients of scale * prod (x - r), padded to `length`.
CVector from_roots(const RootSet& rs);

/// Replaces roots i with bit i set in `mask` by 1/conj(root), rebuilds the
/// polynomial and returns unit-norm weights whose largest entry is positive
/// real. Throws std::domain_error when a flipped root is near zero.
CVector flip(const RootSet& rs, std::uint64_t mask);

/// M max|w_m|^2 / ||w||^2; throws std::domain_error on a zero vector.
double papr(const CVector& w);

struct PaprCandidate {
  std::uint64_t flip_mask = 0;  ///< over all roots; low Q bits enumerated
  CVector weights;
  double papr = 0.0;
};

struct PaprSearch {
  CVector original;  ///< unit norm, phase-normalized
  double original_papr = 0.0;
  std::vector<PaprCandidate> candidates;  ///< 2^Q entries in mask order; skipped masks absent
  PaprCandidate best;  ///< minimum PAPR over the original (mask 0) and the candidates
  int skipped = 0;
};

inline constexpr int kMaxEnumeratedRoots = 24;

/// Roots beyond the first Q get a seed-determined fixed flip; the first Q are
/// enumerated. Q above kMaxEnumeratedRoots requires `allow_large_q`.
PaprSearch enumerate_flips(const CVector& w, int q, std::uint64_t seed, bool allow_large_q = false);

/// Minimum-PAPR member of enumerate_flips, the original included.
PaprCandidate search_min_papr(const CVector& w, int q, std::uint64_t seed);

/// r[k] = sum_m w_m conj(w_{m+k}) for k = 0..M-1.
CVector autocorrelation(const CVector& w);

/// Phase-rotates so the largest-magnitude entry is positive real.
CVector normalize_phase(const CVector& w);

/// candidate_index,flip_mask_hex,papr with the original as index 1.
void write_candidates_csv(std::ostream& os, const PaprSearch& s);

}  // namespace broadbeam
