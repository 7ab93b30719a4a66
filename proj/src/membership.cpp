#include "posfact/membership.hpp"

#include "posfact/factorization.hpp"

#include <cmath>
#include <sstream>

namespace posfact {

namespace {

// Near-boundary flags: within one decade of a verdict-flipping threshold.
bool near_decade(double value, double threshold) {
  return value >= threshold / 10.0 && value <= threshold * 10.0;
}

Confidence membership_confidence(const SpectrumReport& rep, double scale,
                                 const Tolerances& tol) {
  if (rep.kernel_overcount) return Confidence::NearBoundary;
  if (near_decade(rep.eigvec_cond, tol.cond_max)) {
    return Confidence::NearBoundary;
  }
  int geo = 0, alg = 0;
  for (const auto& c : rep.clusters) {
    geo += c.geometric_mult;
    alg += c.algebraic_mult;
  }
  // Formally diagonalizable but condition-capped: the verdict is Outside,
  // yet a small perturbation could flip it.
  if (rep.eigvec_cond > tol.cond_max && geo == alg) {
    return Confidence::NearBoundary;
  }
  const double floor = tol.tol_psd * scale;
  for (const auto& c : rep.clusters) {
    const double re = c.eigenvalue.real();
    const double im = std::abs(c.eigenvalue.imag());
    if (re < 0 && near_decade(-re, floor)) return Confidence::NearBoundary;
    if (im > 0 && near_decade(im, floor)) return Confidence::NearBoundary;
  }
  return Confidence::Firm;
}

}  // namespace

MembershipVerdict is_l2p(const CMatrix& T, const Tolerances& tol) {
  ensure_square(T, "is_l2p");
  ensure_finite(T, "is_l2p");
  MembershipVerdict v;
  v.spectrum = eig_general(T, tol);
  const double scale = op_norm(T);
  v.confidence = membership_confidence(v.spectrum, scale, tol);
  v.in_l2p = v.spectrum.diagonalizable && v.spectrum.spectrum_nonneg;
  if (!v.in_l2p) {
    v.subclass = Subclass::Outside;
    std::ostringstream reason;
    if (!v.spectrum.spectrum_nonneg) {
      reason << "spectrum leaves the nonnegative reals";
      if (!v.spectrum.diagonalizable) reason << "; ";
    }
    if (!v.spectrum.diagonalizable) {
      reason << "not diagonalizable (eigvec_cond " << v.spectrum.eigvec_cond
             << ", geometric multiplicities fall short)";
    }
    v.reason = reason.str();
    return v;
  }
  v.witness = optimal_pair(T, tol);
  if (v.witness->residual > tol.tol_eq * std::max(T.norm(), 1e-300)) {
    // The spectral test said member but the witness cannot be certified;
    // happens only next to the defective boundary.
    v.in_l2p = false;
    v.witness.reset();
    v.subclass = Subclass::Outside;
    v.confidence = Confidence::NearBoundary;
    v.reason = "witness residual exceeds tol_eq near the defective boundary";
    return v;
  }
  v.subclass = Subclass::General;
  v.reason = "diagonalizable with nonnegative spectrum";
  return v;
}

bool proj_proj_test(const CMatrix& T, const Tolerances& tol) {
  const double nrm = op_norm(T);
  const CMatrix lhs = T * T.adjoint() * T;
  const CMatrix rhs = T * T;
  return (lhs - rhs).norm() <= tol.tol_eq * nrm * nrm * nrm;
}

bool pos_proj_test(const CMatrix& T, const Tolerances& tol) {
  const Index n = T.rows();
  const RangeKernel rk = range_kernel(T, tol);
  const Subspace ranTH = range_kernel(CMatrix(T.adjoint()), tol).range;
  const Subspace& kerT = rk.kernel;
  const Index r = ranTH.dim();
  if (r + kerT.dim() != n) return false;  // rank-nullity must close the split
  if (r == 0) return true;                // T = 0 = 0 · P
  CMatrix U(n, n);
  U.leftCols(r) = ranTH.basis;
  U.rightCols(n - r) = kerT.basis;
  const CMatrix That = U.adjoint() * T * U;
  const CMatrix T11 = That.topLeftCorner(r, r);
  const CMatrix T21 = That.bottomLeftCorner(n - r, r);
  const double scale = std::max(T.norm(), 1e-300);
  if ((T11 - T11.adjoint()).norm() > tol.tol_eq * scale) return false;
  HermEig he = eig_hermitian(herm(T11), tol);
  const double lmax = std::max(
      {std::abs(he.values(r - 1)), std::abs(he.values(0)), 1e-300});
  if (he.values(0) < -tol.tol_psd * lmax &&
      he.values(0) < -tol.tol_psd * scale) {
    return false;
  }
  const Subspace ranT11 = column_space(herm(T11), tol);
  const CMatrix A12 = T21.adjoint();
  return range_leak(ranT11, A12) <= tol.tol_eq * scale;
}

MembershipVerdict classify_subclass(const CMatrix& T, const Tolerances& tol) {
  MembershipVerdict v = is_l2p(T, tol);
  if (!v.in_l2p) return v;
  if (proj_proj_test(T, tol)) {
    v.subclass = Subclass::ProjProj;
    v.reason = "T T^H T = T^2: product of two orthogonal projections";
  } else if (pos_proj_test(T, tol)) {
    v.subclass = Subclass::PosProj;
    v.reason = "T = A P over ran T^H: positive times orthogonal projection";
  }
  return v;
}

double feasibility_lambda(const CMatrix& A, const CMatrix& T,
                          const Tolerances& tol) {
  ensure_square(A, "feasibility_lambda");
  if (A.rows() != T.rows() || T.rows() != T.cols()) {
    throw DimensionMismatchError("feasibility_lambda: dimension mismatch");
  }
  // A itself must be a positive operator.
  CMatrix Ah;
  try {
    Ah = herm_checked(A, tol, "feasibility_lambda(A)");
  } catch (const NotHermitianError&) {
    throw NotPsdError("feasibility_lambda: A is not Hermitian");
  }
  {
    HermEig ea = eig_hermitian(Ah, tol);
    const double lmax = std::max(std::abs(ea.values(ea.values.size() - 1)),
                                 std::abs(ea.values(0)));
    if (ea.values(0) < -tol.tol_psd * lmax) {
      throw NotPsdError("feasibility_lambda: A is not PSD");
    }
  }

  const CMatrix M = A * T.adjoint();
  const CMatrix W = herm(T * T.adjoint());
  const double mscale = std::max(M.norm(), 1e-300);
  if ((M - M.adjoint()).norm() > tol.tol_eq * std::max(mscale, W.norm())) {
    throw InfeasibleError("feasibility_lambda: A T^H is not Hermitian");
  }
  const CMatrix Mh = herm(M);
  HermEig em = eig_hermitian(Mh, tol);
  const double memax = std::max(std::abs(em.values(em.values.size() - 1)),
                                std::abs(em.values(0)));
  if (em.values(0) < -tol.tol_psd * std::max(memax, 1e-300)) {
    throw InfeasibleError("feasibility_lambda: A T^H is not PSD");
  }

  const Subspace ranM = column_space(Mh, tol);
  if (range_leak(ranM, W) > tol.tol_eq * std::max(W.norm(), 1e-300)) {
    throw InfeasibleError(
        "feasibility_lambda: ran T T^H not contained in ran A T^H");
  }
  const Index r = ranM.dim();
  if (r == 0) return 0.0;

  // Largest generalized eigenvalue of (T T^H, A T^H) restricted to ran(A T^H).
  const CMatrix Mr = herm(CMatrix(ranM.basis.adjoint() * Mh * ranM.basis));
  const CMatrix Wr = herm(CMatrix(ranM.basis.adjoint() * W * ranM.basis));
  const CMatrix Mrs = psd_sqrt(Mr, tol);
  const CMatrix Mrsi = Mrs.inverse();
  HermEig ek = eig_hermitian(herm(CMatrix(Mrsi * Wr * Mrsi)), tol);
  return std::max(ek.values(ek.values.size() - 1), 0.0);
}

}  // namespace posfact
