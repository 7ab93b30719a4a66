#include "posfact/factorization.hpp"

#include "posfact/membership.hpp"

#include <cmath>

namespace posfact {

Factorization make_factorization(const CMatrix& A, const CMatrix& B,
                                 const CMatrix& T, const Tolerances& tol) {
  Factorization f;
  f.A = A;
  f.B = B;
  f.residual = (A * B - T).norm();
  const Subspace ranA = column_space(A, tol);
  const Subspace ranT = column_space(T, tol);
  const Subspace kerB = range_kernel(B, tol).kernel;
  const Subspace kerT = range_kernel(T, tol).kernel;
  f.range_match = subspace_gap(ranA, ranT);
  f.kernel_match = subspace_gap(kerB, kerT);
  f.optimal = f.range_match <= kTolAngle && f.kernel_match <= kTolAngle;
  return f;
}

Factorization optimal_pair(const CMatrix& T, const Tolerances& tol) {
  ensure_square(T, "optimal_pair");
  ensure_finite(T, "optimal_pair");
  const SpectrumReport rep = eig_general(T, tol);
  if (!rep.diagonalizable || !rep.spectrum_nonneg) {
    throw NotInClassError("optimal_pair: T is not in L+2");
  }
  const Index n = T.rows();
  const GeneralEig eg = eig_decomposition(T, tol);

  // Eigenvalues: real parts clipped to zero below the PSD floor; entries
  // under the rank cutoff zeroed exactly so ran C is clean.
  RVector c(n);
  double lmax = 0.0;
  for (Index i = 0; i < n; ++i) {
    c(i) = std::max(eg.values(i).real(), 0.0);
    lmax = std::max(lmax, c(i));
  }
  RVector p(n);
  for (Index i = 0; i < n; ++i) {
    if (c(i) <= tol.tol_rank * lmax) c(i) = 0.0;
    p(i) = c(i) > 0.0 ? 1.0 : 0.0;
  }

  const CMatrix& G = eg.vectors;
  const CMatrix Ginv = G.inverse();
  CMatrix A = herm(CMatrix(G * p.asDiagonal() * G.adjoint()));
  CMatrix B = herm(CMatrix(Ginv.adjoint() * c.asDiagonal() * Ginv));
  return make_factorization(A, B, T, tol);
}

CMatrix sebestyen_solve(const CMatrix& A, const CMatrix& T,
                        const Tolerances& tol) {
  feasibility_lambda(A, T, tol);  // throws Infeasible / NotPsd as needed
  const CMatrix R = psd_sqrt(herm(T * A.adjoint()), tol);
  CMatrix G;
  try {
    G = douglas_solve(R, T, tol);
  } catch (const RangeNotContainedError&) {
    throw InfeasibleError("sebestyen_solve: ran T escapes ran (T A^H)^{1/2}");
  }
  return herm(CMatrix(G.adjoint() * G));
}

CMatrix cone_minimal(const CMatrix& A, const CMatrix& T,
                     const Tolerances& tol) {
  const Subspace ranA = column_space(A, tol);
  if (range_leak(ranA, T) > tol.tol_eq * std::max(T.norm(), 1e-300)) {
    throw RangeMismatchError("cone_minimal: ran T not contained in ran A");
  }
  const CMatrix B0 = sebestyen_solve(A, T, tol);

  // Certify the minimal-completion structure over ran T ⊕ ker T^H:
  // B22 = B12^H pinv(B11) B12.
  const Index n = T.rows();
  const Subspace ranT = column_space(T, tol);
  const Subspace kerTH = range_kernel(CMatrix(T.adjoint()), tol).kernel;
  const Index r = ranT.dim();
  if (r + kerTH.dim() == n) {
    CMatrix U(n, n);
    U.leftCols(r) = ranT.basis;
    U.rightCols(n - r) = kerTH.basis;
    const CMatrix Bh = U.adjoint() * B0 * U;
    const CMatrix B11 = herm(CMatrix(Bh.topLeftCorner(r, r)));
    const CMatrix B12 = Bh.topRightCorner(r, n - r);
    const CMatrix B22 = Bh.bottomRightCorner(n - r, n - r);
    const CMatrix want = B12.adjoint() * pinv(B11, tol) * B12;
    if ((B22 - want).norm() >
        tol.tol_eq * std::max(B0.norm(), 1e-300) * 10.0) {
      throw CertificateError(
          "cone_minimal: minimal-completion block identity failed");
    }
  }
  return B0;
}

ConeSample cone_sample(const CMatrix& A, const CMatrix& T, const CMatrix& Z,
                       const Tolerances& tol) {
  const Subspace ranA = column_space(A, tol);
  const Subspace ranT = column_space(T, tol);
  if (subspace_gap(ranA, ranT) > kTolAngle) {
    throw RangeMismatchError("cone_sample: ran A must equal ran T");
  }
  const CMatrix Zh = herm_checked(Z, tol, "cone_sample(Z)");
  {
    HermEig ez = eig_hermitian(Zh, tol);
    const double zmax = std::max(std::abs(ez.values(ez.values.size() - 1)),
                                 std::abs(ez.values(0)));
    if (ez.values(0) < -tol.tol_psd * std::max(zmax, 1e-300)) {
      throw InvalidPerturbationError("cone_sample: Z is not PSD");
    }
  }
  const Subspace kerTH = range_kernel(CMatrix(T.adjoint()), tol).kernel;
  if (range_leak(kerTH, Zh) > tol.tol_eq * std::max(Zh.norm(), 1e-300)) {
    throw InvalidPerturbationError(
        "cone_sample: ran Z not contained in ker T^H");
  }
  ConeSample out;
  out.B = cone_minimal(A, T, tol) + Zh;
  const double resid = (A * out.B - T).norm();
  if (resid > tol.tol_eq * std::max(T.norm(), 1e-300) * 10.0) {
    throw CertificateError("cone_sample: A(B0+Z) strayed from T");
  }
  const Subspace ranTH = range_kernel(CMatrix(T.adjoint()), tol).range;
  const Subspace meet = subspace_ops(ranTH, kerTH, tol).intersection;
  const Subspace ranZ = column_space(Zh, tol);
  out.optimal = ranZ.dim() == 0 ||
                range_leak(meet, CMatrix(ranZ.basis)) <=
                    kTolAngle * std::sqrt(double(ranZ.dim()));
  return out;
}

SchurPair schur_complement(const CMatrix& B, const Subspace& S,
                           const Tolerances& tol) {
  const CMatrix Bh = herm_checked(B, tol, "schur_complement(B)");
  const Index n = Bh.rows();
  if (S.ambient_dim != n) {
    throw DimensionMismatchError("schur_complement: ambient dim mismatch");
  }
  {
    HermEig eb = eig_hermitian(Bh, tol);
    const double bmax = std::max(std::abs(eb.values(eb.values.size() - 1)),
                                 std::abs(eb.values(0)));
    if (eb.values(0) < -tol.tol_psd * std::max(bmax, 1e-300)) {
      throw NotPsdError("schur_complement: B is not PSD");
    }
  }
  SchurPair out;
  if (S.dim() == n) {  // nothing may stick out of S-perp = {0}
    out.complement = CMatrix::Zero(n, n);
    out.compression = Bh;
    out.contraction_norm = 0.0;
    return out;
  }
  if (S.dim() == 0) {  // B itself is supported on S-perp = H
    out.complement = Bh;
    out.compression = CMatrix::Zero(n, n);
    out.contraction_norm = 0.0;
    return out;
  }
  const Subspace Sp = complement(S);
  const Index k = S.dim();
  CMatrix U(n, n);
  U.leftCols(k) = S.basis;
  U.rightCols(n - k) = Sp.basis;

  const CMatrix Bt = U.adjoint() * Bh * U;
  const CMatrix B11 = herm(CMatrix(Bt.topLeftCorner(k, k)));
  const CMatrix B12 = Bt.topRightCorner(k, n - k);
  const CMatrix B22 = herm(CMatrix(Bt.bottomRightCorner(n - k, n - k)));

  const CMatrix B11h = psd_sqrt(B11, tol);
  const CMatrix B22h = psd_sqrt(B22, tol);

  // Contraction F with B12 = B11^{1/2} F B22^{1/2}; both Douglas-style
  // range conditions must hold, or B was not positive to begin with.
  CMatrix F;
  try {
    const CMatrix Fpart = douglas_solve(B11h, B12, tol);   // B11h Fpart = B12
    F = douglas_solve(B22h, CMatrix(Fpart.adjoint()), tol).adjoint();
  } catch (const RangeNotContainedError&) {
    throw NotPsdError("schur_complement: no contraction F exists");
  }

  out.contraction_norm = op_norm(F);
  if (out.contraction_norm > 1.0 + 100 * tol.tol_eq) {
    throw NotPsdError("schur_complement: contraction norm " +
                      std::to_string(out.contraction_norm) + " exceeds 1");
  }
  const Index m = n - k;
  CMatrix comp_block =
      herm(CMatrix(B22h * (CMatrix::Identity(m, m) - F.adjoint() * F) * B22h));
  out.complement = herm(CMatrix(Sp.basis * comp_block * Sp.basis.adjoint()));
  out.compression = herm(CMatrix(Bh - out.complement));
  return out;
}

CMatrix psd_completion(const CMatrix& B11, const CMatrix& B12,
                       const Tolerances& tol) {
  const CMatrix B11h = herm_checked(B11, tol, "psd_completion(B11)");
  if (B11.rows() != B12.rows()) {
    throw DimensionMismatchError("psd_completion: row counts differ");
  }
  const CMatrix R = psd_sqrt(B11h, tol);
  const CMatrix G = douglas_solve(R, B12, tol);  // RangeNotContained passes up
  const CMatrix B22 = herm(CMatrix(G.adjoint() * G));
  const Index k = B11.rows();
  const Index m = B12.cols();
  CMatrix full(k + m, k + m);
  full.topLeftCorner(k, k) = B11h;
  full.topRightCorner(k, m) = B12;
  full.bottomLeftCorner(m, k) = B12.adjoint();
  full.bottomRightCorner(m, m) = B22;
  return full;
}

Factorization invertible_factor_pair(const CMatrix& T, const Tolerances& tol) {
  const Factorization opt = optimal_pair(T, tol);  // NotInClass passes up
  const Subspace kerA = range_kernel(opt.A, tol).kernel;
  CMatrix B = herm(CMatrix(opt.B + projector(kerA)));
  Factorization f = make_factorization(opt.A, B, T, tol);
  HermEig eb = eig_hermitian(B, tol);
  const double bmax = std::max(std::abs(eb.values(eb.values.size() - 1)),
                               std::abs(eb.values(0)));
  if (eb.values(0) <= tol.tol_psd * std::max(bmax, 1e-300)) {
    throw CertificateError("invertible_factor_pair: B is not invertible");
  }
  return f;
}

PairOrder pair_leq(const Factorization& p, const Factorization& q,
                   const Tolerances& tol) {
  if (p.A.rows() != q.A.rows() || p.B.rows() != q.B.rows()) {
    throw DimensionMismatchError("pair_leq: dimension mismatch");
  }
  const double scale =
      std::max({p.A.norm(), p.B.norm(), q.A.norm(), q.B.norm(), 1e-300});
  auto psd_at_floor = [&](const CMatrix& D) {
    HermEig e = eig_hermitian(herm(D), tol);
    return e.values(0) >= -tol.tol_psd * scale;
  };
  const CMatrix dA = q.A - p.A;
  const CMatrix dB = q.B - p.B;
  const bool equal =
      dA.norm() <= tol.tol_eq * scale && dB.norm() <= tol.tol_eq * scale;
  if (equal) return PairOrder::Equal;
  if (psd_at_floor(dA) && psd_at_floor(dB)) return PairOrder::Less;
  if (psd_at_floor(CMatrix(-dA)) && psd_at_floor(CMatrix(-dB))) {
    return PairOrder::Greater;
  }
  return PairOrder::Incomparable;
}

MDecomposition m_decomposition(const CMatrix& T, const Tolerances& tol) {
  ensure_square(T, "m_decomposition");
  ensure_finite(T, "m_decomposition");
  const RangeKernel rk = range_kernel(T, tol);
  MDecomposition out;
  out.M = subspace_ops(rk.range, rk.kernel, tol).sum;
  out.T_M = T * projector(out.M);

  MembershipVerdict base = is_l2p(T, tol);
  if (base.in_l2p) {
    const Factorization& w = *base.witness;
    const Subspace Mp = complement(out.M);
    out.T_upper_M = T + projector(Mp) * w.B;
  }

  MembershipVerdict vM = is_l2p(out.T_M, tol);
  if (vM.in_l2p) {
    out.pair_T_M = vM.witness;
    const CMatrix AB12 =
        out.pair_T_M->A * psd_sqrt(out.pair_T_M->B, tol);
    const Subspace ranAB12 = column_space(AB12, tol);
    out.condition_ii =
        range_leak(ranAB12, T) <= tol.tol_eq * std::max(T.norm(), 1e-300);
  }
  return out;
}

}  // namespace posfact
