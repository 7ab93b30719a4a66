#pragma once

#include "posfact/types.hpp"

namespace posfact {

double fro_norm(const CMatrix& M);
/// Singular values only, descending; cheaper than a full SVD.
RVector singular_values(const CMatrix& M);
/// Spectral norm (largest singular value).
double op_norm(const CMatrix& M);

/// Hermitian part (M + M^H)/2.
CMatrix herm(const CMatrix& M);

/// Hermitian part after checking that the asymmetry is within
/// tol_eq * ||M||; larger asymmetry is an error, smaller is repaired.
CMatrix herm_checked(const CMatrix& M, const Tolerances& tol,
                     const std::string& what);

struct SvdResult {
  CMatrix U;
  RVector sigma;  // descending
  CMatrix V;
  Index rank(double tol_rank) const;
};

SvdResult svd(const CMatrix& M);

struct HermEig {
  RVector values;  // ascending
  CMatrix vectors; // unitary, sign-fixed columns
};

/// Eigendecomposition of the Hermitian part of M.
HermEig eig_hermitian(const CMatrix& M, const Tolerances& tol);

struct GeneralEig {
  CVector values;   // ascending by (Re, Im)
  CMatrix vectors;  // unit columns, sign-fixed
};

/// Dense eigendecomposition with canonical ordering and column phases.
/// Columns belonging to an eigenvalue cluster are replaced by an orthonormal
/// kernel basis of T - mean, when one of full cluster size exists; repeated
/// eigenvalues otherwise come back from the solver nearly dependent.
GeneralEig eig_decomposition(const CMatrix& T, const Tolerances& tol = {});

/// Single-linkage eigenvalue clusters at absolute width; each cluster is a
/// list of indices into `values`, clusters ordered by (Re, Im) of their mean.
std::vector<std::vector<int>> cluster_indices(const CVector& values,
                                              double width);

/// Spectrum report: clusters, multiplicities, diagonalizability and
/// positivity verdicts.
SpectrumReport eig_general(const CMatrix& T, const Tolerances& tol);

/// Square root of a Hermitian PSD matrix; eigenvalues below the PSD floor
/// are clipped to zero, below -tol_psd*||M|| it throws NotPsdError.
CMatrix psd_sqrt(const CMatrix& M, const Tolerances& tol);

/// Moore-Penrose pseudo-inverse with singular values below
/// tol_rank * sigma_max treated as zero.
CMatrix pinv(const CMatrix& M, const Tolerances& tol);

struct RangeKernel {
  Subspace range;
  Subspace kernel;
};

/// scale_floor guards shifted matrices like T - λ1 whose largest singular
/// value may itself be rounding noise: the rank cutoff becomes
/// tol_rank * max(sigma_max, scale_floor).
RangeKernel range_kernel(const CMatrix& M, const Tolerances& tol,
                         double scale_floor = 0.0);

/// Orthonormal basis of the column span.
Subspace column_space(const CMatrix& M, const Tolerances& tol);

/// Orthonormal basis of the orthogonal complement.
Subspace complement(const Subspace& S);

/// Orthogonal projector U*U^H.
CMatrix projector(const Subspace& S);

/// ||(1 - P_S) M||_F, the part of ran M sticking out of S.
double range_leak(const Subspace& S, const CMatrix& M);

struct SubspaceRelation {
  Subspace intersection;
  Subspace sum;
  std::vector<double> principal_angles;  // ascending, in [0, pi/2]
};

SubspaceRelation subspace_ops(const Subspace& U, const Subspace& V,
                              const Tolerances& tol);

/// Largest principal angle between U and V; pi/2 when dimensions differ.
double subspace_gap(const Subspace& U, const Subspace& V);

/// Minimal-norm X with A X = T, provided ran T is contained in ran A
/// (otherwise RangeNotContainedError).
CMatrix douglas_solve(const CMatrix& A, const CMatrix& T,
                      const Tolerances& tol);

}  // namespace posfact
