#pragma once

#include "posfact/linalg.hpp"
#include "posfact/types.hpp"

namespace posfact {

/// Builds a Factorization record for T = A·B, measuring the residual and the
/// range/kernel optimality certificates.
Factorization make_factorization(const CMatrix& A, const CMatrix& B,
                                 const CMatrix& T, const Tolerances& tol);

/// Optimal pair for a member: from T G = G C with C the nonnegative diagonal
/// of eigenvalues, A = G P G^H (P the projection onto ran C) and
/// B = G^{-H} C G^{-1}. Throws NotInClassError off the class.
Factorization optimal_pair(const CMatrix& T, const Tolerances& tol);

/// Positive solution X of A X = T per Sebestyén's construction
/// (T = (T A^H)^{1/2} G by a Douglas solve, X = G^H G), certified to satisfy
/// ker X = ker T and X_{/ran T} = 0. Throws InfeasibleError.
CMatrix sebestyen_solve(const CMatrix& A, const CMatrix& T,
                        const Tolerances& tol);

/// Minimum B0 of the solution cone {X ⪰ 0 : A X = T}, certified against the
/// minimal-completion block structure over ran T ⊕ ker T^H.
CMatrix cone_minimal(const CMatrix& A, const CMatrix& T, const Tolerances& tol);

struct ConeSample {
  CMatrix B;        // B0 + Z
  bool optimal;     // ran Z ⊆ ran T^H ∩ ker T^H
};

/// Element B0 + Z of the cone for a PSD perturbation Z with
/// ran Z ⊆ ker T^H; flags whether (A, B0 + Z) stays an optimal pair.
ConeSample cone_sample(const CMatrix& A, const CMatrix& T, const CMatrix& Z,
                       const Tolerances& tol);

/// Schur complement and compression of a PSD matrix relative to S, computed
/// through the contraction F with B12 = B11^{1/2} F B22^{1/2}.
SchurPair schur_complement(const CMatrix& B, const Subspace& S,
                           const Tolerances& tol);

/// Minimal PSD completion [[B11, B12], [B12^H, B22]] with B22 = G^H G,
/// G solving B11^{1/2} G = B12.
CMatrix psd_completion(const CMatrix& B11, const CMatrix& B12,
                       const Tolerances& tol);

/// Pair (A, B' + P_{ker A}) with B invertible and A·B = T.
Factorization invertible_factor_pair(const CMatrix& T, const Tolerances& tol);

/// Löwner comparison of two factor pairs componentwise.
PairOrder pair_leq(const Factorization& p, const Factorization& q,
                   const Tolerances& tol);

struct MDecomposition {
  Subspace M;                       // ran T + ker T
  CMatrix T_M;                      // T P_M
  std::optional<CMatrix> T_upper_M; // T + P_{M-perp} B, members only
  bool condition_ii = false;
  std::optional<Factorization> pair_T_M;  // optimal pair used by the test
};

/// Decomposition of arbitrary T along M = ran T + ker T, with the
/// membership filter of the restriction/extension equivalence.
MDecomposition m_decomposition(const CMatrix& T, const Tolerances& tol);

}  // namespace posfact
