#pragma once

#include "posfact/factorization.hpp"
#include "posfact/linalg.hpp"
#include "posfact/types.hpp"

#include <functional>

namespace posfact {

/// Geometric mean E # F = E^{1/2}(E^{-1/2} F E^{-1/2})^{1/2} E^{1/2} for
/// invertible PSD E; the unique PSD solution of M E^{-1} M = F.
CMatrix geometric_mean(const CMatrix& E, const CMatrix& F,
                       const Tolerances& tol);

/// Square root of a member through the invertible-factor route:
/// R = (B^{-1} # A) B, R² = T, R in L+².
CMatrix sqrt_l2p(const CMatrix& T, const Tolerances& tol);

/// f(T) = G f(C) G^{-1} from the eigendecomposition; eigenvalues are clipped
/// into [0, ||T||] before f is applied. DomainError if f is not finite at an
/// eigenvalue.
CMatrix borel_calculus(const CMatrix& T, const std::function<double(double)>& f,
                       const Tolerances& tol);

struct RieszTerm {
  double eigenvalue = 0.0;
  CMatrix projection;  // idempotent, generally oblique
};

struct RieszDecomposition {
  std::vector<RieszTerm> terms;       // ascending by eigenvalue
  Factorization optimal_pair_sum;     // A = Σ P_{ran Q_j}, B = Σ λ_j Q_j^H Q_j
};

RieszDecomposition riesz_decomposition(const CMatrix& T, const Tolerances& tol);

/// ker(T - λ), which for members equals the local spectral subspace; also
/// certifies the absence of Jordan structure at λ.
Subspace local_spectral_subspace(const CMatrix& T, double lambda,
                                 const Tolerances& tol);

/// ∩_{λ ∈ σ(T)\F} ran(T - λ), certified equal to the span of the
/// eigenspaces over F.
Subspace algebraic_spectral_subspace(const CMatrix& T,
                                     const std::vector<double>& F,
                                     const Tolerances& tol);

struct MpInverse {
  CMatrix dagger;           // B† Q A†, equal to the SVD pseudo-inverse
  CMatrix one_two_inverse;  // Q^H dagger Q^H, a (1,2)-inverse in L+²
  CMatrix oblique;          // Q, projection onto ran T^H along ker T^H
};

MpInverse mp_inverse_l2p(const CMatrix& T, const Tolerances& tol);

struct ResolventProfileRow {
  double im_abs = 0.0;
  double max_ratio = 0.0;      // max over real parts of ||(T-λ)^{-1}|| / (1+|Im λ|^{-2})
  double max_resolvent = 0.0;
};

struct ResolventCertificate {
  double kappa = 0.0;
  std::vector<ResolventProfileRow> profile;
};

/// Sampled generalized-scalar certificate: κ bounding
/// ||(T-λ)^{-1}|| ≤ κ (1 + |Im λ|^{-2}) over a seeded log grid off the axis.
ResolventCertificate resolvent_growth_certificate(const CMatrix& T,
                                                  int samples, uint64_t seed,
                                                  const Tolerances& tol);

struct RiccatiSolution {
  CMatrix X;     // PSD, X H X = P_{ran H} K P_{ran H}
  double a = 0;  // smallest a with (H^{1/2} K H^{1/2})^{1/2} ⪯ a H on ran H
};

/// Pedersen–Takesaki solver for X H X = P K P.
RiccatiSolution pedersen_takesaki(const CMatrix& H, const CMatrix& K,
                                  const Tolerances& tol);

}  // namespace posfact
