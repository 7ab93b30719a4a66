#pragma once

#include "posfact/linalg.hpp"
#include "posfact/types.hpp"

namespace posfact {

/// Decides T ∈ L+² (finite dimension: diagonalizable with nonnegative
/// spectrum). When true, the verdict carries the optimal-pair witness.
MembershipVerdict is_l2p(const CMatrix& T, const Tolerances& tol);

/// Refines a positive membership verdict into the subclass lattice
/// ProjProj ⊂ PosProj ⊂ General; non-members come back Outside.
MembershipVerdict classify_subclass(const CMatrix& T, const Tolerances& tol);

/// Smallest λ ≥ 0 with T T^H ⪯ λ A T^H, or InfeasibleError when A T^H is
/// not Hermitian PSD / the range condition fails. NotPsdError when A is not
/// Hermitian PSD.
double feasibility_lambda(const CMatrix& A, const CMatrix& T,
                          const Tolerances& tol);

/// The T T^H T = T² residual test for membership in P·P, scaled by ||T||³.
bool proj_proj_test(const CMatrix& T, const Tolerances& tol);

/// The block test for membership in L+·P: over ran T^H ⊕ ker T, the leading
/// block must be Hermitian PSD and the (2,1) block's adjoint range contained
/// in it.
bool pos_proj_test(const CMatrix& T, const Tolerances& tol);

}  // namespace posfact
