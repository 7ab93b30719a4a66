#include "posfact/calculus.hpp"

#include "posfact/membership.hpp"

#include <cmath>
#include <random>

namespace posfact {

namespace {

void require_psd(const CMatrix& M, const Tolerances& tol,
                 const std::string& what) {
  HermEig e = eig_hermitian(herm_checked(M, tol, what), tol);
  const double mmax = std::max(std::abs(e.values(e.values.size() - 1)),
                               std::abs(e.values(0)));
  if (e.values(0) < -tol.tol_psd * std::max(mmax, 1e-300)) {
    throw NotPsdError(what + ": not PSD");
  }
}

}  // namespace

CMatrix geometric_mean(const CMatrix& E, const CMatrix& F,
                       const Tolerances& tol) {
  const CMatrix Eh = herm_checked(E, tol, "geometric_mean(E)");
  HermEig ee = eig_hermitian(Eh, tol);
  if (ee.values(0) <= tol.tol_psd * std::max(Eh.norm(), 1e-300)) {
    throw NotInvertibleError("geometric_mean: E is not invertible");
  }
  require_psd(F, tol, "geometric_mean(F)");
  const CMatrix Es = psd_sqrt(Eh, tol);
  const CMatrix Esi = Es.inverse();
  const CMatrix inner = psd_sqrt(herm(CMatrix(Esi * herm(F) * Esi)), tol);
  return herm(CMatrix(Es * inner * Es));
}

CMatrix sqrt_l2p(const CMatrix& T, const Tolerances& tol) {
  const Factorization f = invertible_factor_pair(T, tol);
  const CMatrix Binv = f.B.inverse();
  const CMatrix mean = geometric_mean(herm(Binv), f.A, tol);
  return mean * f.B;
}

CMatrix borel_calculus(const CMatrix& T, const std::function<double(double)>& f,
                       const Tolerances& tol) {
  const MembershipVerdict v = is_l2p(T, tol);
  if (!v.in_l2p) throw NotInClassError("borel_calculus: T not in L+2");
  const double nrm = op_norm(T);
  const GeneralEig eg = eig_decomposition(T, tol);
  CVector fc(eg.values.size());
  for (Index i = 0; i < eg.values.size(); ++i) {
    double x = eg.values(i).real();
    // The calculus lives on σ(T) ⊆ [0, ||T||]; repair rounding excursions.
    if (x < 0 && x >= -tol.tol_psd * nrm) x = 0.0;
    if (x > nrm && x <= nrm * (1 + tol.tol_psd)) x = nrm;
    const double y = f(x);
    if (!std::isfinite(y)) {
      throw DomainError("borel_calculus: f undefined at eigenvalue " +
                        std::to_string(x));
    }
    fc(i) = Complex(y, 0.0);
  }
  return eg.vectors * fc.asDiagonal() * eg.vectors.inverse();
}

RieszDecomposition riesz_decomposition(const CMatrix& T,
                                       const Tolerances& tol) {
  const MembershipVerdict v = is_l2p(T, tol);
  if (!v.in_l2p) throw NotInClassError("riesz_decomposition: T not in L+2");
  const Index n = T.rows();
  const double nrm = op_norm(T);
  const GeneralEig eg = eig_decomposition(T, tol);
  const CMatrix Ginv = eg.vectors.inverse();
  const auto groups = cluster_indices(eg.values, tol.tol_cluster * nrm);

  RieszDecomposition out;
  CMatrix A = CMatrix::Zero(n, n);
  CMatrix B = CMatrix::Zero(n, n);
  for (const auto& g : groups) {
    RieszTerm term;
    double mean = 0.0;
    CMatrix right(n, static_cast<Index>(g.size()));
    CMatrix left(static_cast<Index>(g.size()), n);
    for (size_t k = 0; k < g.size(); ++k) {
      mean += eg.values(g[k]).real();
      right.col(static_cast<Index>(k)) = eg.vectors.col(g[k]);
      left.row(static_cast<Index>(k)) = Ginv.row(g[k]);
    }
    mean /= static_cast<double>(g.size());
    term.eigenvalue = std::max(mean, 0.0);
    term.projection = right * left;
    if (term.eigenvalue > tol.tol_rank * std::max(nrm, 1e-300)) {
      A += projector(column_space(term.projection, tol));
      B += term.eigenvalue *
           CMatrix(term.projection.adjoint() * term.projection);
    }
    out.terms.push_back(std::move(term));
  }
  out.optimal_pair_sum = make_factorization(herm(A), herm(B), T, tol);
  return out;
}

Subspace local_spectral_subspace(const CMatrix& T, double lambda,
                                 const Tolerances& tol) {
  const MembershipVerdict v = is_l2p(T, tol);
  if (!v.in_l2p) {
    throw NotInClassError("local_spectral_subspace: T not in L+2");
  }
  const Index n = T.rows();
  const double anchor = std::max(op_norm(T), std::abs(lambda));
  const CMatrix S = T - lambda * CMatrix::Identity(n, n);
  const Subspace ker1 = range_kernel(S, tol, anchor).kernel;
  const Subspace ker2 = range_kernel(CMatrix(S * S), tol, anchor * anchor).kernel;
  if (ker1.dim() != ker2.dim()) {
    throw CertificateError(
        "local_spectral_subspace: Jordan structure detected at lambda");
  }
  return ker1;
}

Subspace algebraic_spectral_subspace(const CMatrix& T,
                                     const std::vector<double>& F,
                                     const Tolerances& tol) {
  const MembershipVerdict v = is_l2p(T, tol);
  if (!v.in_l2p) {
    throw NotInClassError("algebraic_spectral_subspace: T not in L+2");
  }
  const Index n = T.rows();
  const double nrm = op_norm(T);
  const double width = std::max(tol.tol_cluster * nrm, tol.tol_cluster);

  Subspace result = Subspace::full(n);
  CMatrix in_F_span(n, 0);
  for (const auto& c : v.spectrum.clusters) {
    const double lam = c.eigenvalue.real();
    bool in_F = false;
    for (double f : F) {
      if (std::abs(f - lam) <= width) in_F = true;
    }
    const CMatrix S = T - lam * CMatrix::Identity(n, n);
    if (!in_F) {
      const Subspace ran = range_kernel(S, tol, nrm).range;
      result = subspace_ops(result, ran, tol).intersection;
    } else {
      const Subspace ker = range_kernel(S, tol, nrm).kernel;
      CMatrix widened(n, in_F_span.cols() + ker.dim());
      widened.leftCols(in_F_span.cols()) = in_F_span;
      widened.rightCols(ker.dim()) = ker.basis;
      in_F_span = widened;
    }
  }
  const Subspace eigenspan = in_F_span.cols() > 0
                                 ? column_space(in_F_span, tol)
                                 : Subspace::zero(n);
  if (subspace_gap(result, eigenspan) > kTolAngle) {
    throw CertificateError(
        "algebraic_spectral_subspace: range intersection disagrees with the "
        "eigenspace span");
  }
  return result;
}

MpInverse mp_inverse_l2p(const CMatrix& T, const Tolerances& tol) {
  const MembershipVerdict v = is_l2p(T, tol);
  if (!v.in_l2p) throw NotInClassError("mp_inverse_l2p: T not in L+2");
  const Index n = T.rows();
  const Factorization& w = *v.witness;
  const RangeKernel rkH = range_kernel(CMatrix(T.adjoint()), tol);
  const Index r = rkH.range.dim();
  if (r + rkH.kernel.dim() != n) {
    throw CertificateError("mp_inverse_l2p: ran T^H + ker T^H mismatch");
  }
  CMatrix U(n, n);
  U.leftCols(r) = rkH.range.basis;
  U.rightCols(n - r) = rkH.kernel.basis;
  CMatrix D = CMatrix::Zero(n, n);
  D.topLeftCorner(r, r).setIdentity();
  const CMatrix Q = U * D * U.inverse();

  MpInverse out;
  out.oblique = Q;
  out.dagger = pinv(w.B, tol) * Q * pinv(w.A, tol);
  out.one_two_inverse = Q.adjoint() * out.dagger * Q.adjoint();
  return out;
}

ResolventCertificate resolvent_growth_certificate(const CMatrix& T,
                                                  int samples, uint64_t seed,
                                                  const Tolerances& tol) {
  const MembershipVerdict v = is_l2p(T, tol);
  if (!v.in_l2p) {
    throw NotInClassError("resolvent_growth_certificate: T not in L+2");
  }
  if (samples < 2) throw InvalidParamsError("resolvent: samples must be >= 2");
  const Index n = T.rows();
  double s = op_norm(T);
  if (s == 0.0) s = 1.0;

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> jitter(-0.5, 0.5);

  ResolventCertificate out;
  out.kappa = 0.0;
  const double lo = std::log(1e-6), hi = std::log(1.0);
  const double step = (hi - lo) / (samples - 1);
  for (int i = 0; i < samples; ++i) {
    const double t = static_cast<double>(i) / (samples - 1);
    // interior grid points carry a seeded log-jitter; the endpoints pin the
    // sampled band
    const double wobble =
        (i > 0 && i + 1 < samples) ? jitter(rng) * step : 0.0;
    const double im = s * std::exp(lo + t * (hi - lo) + wobble);
    ResolventProfileRow row;
    row.im_abs = im;
    for (int j = 0; j < samples; ++j) {
      const double u = static_cast<double>(j) / (samples - 1);
      const double re = -s + u * 3.0 * s;
      const Complex lambda(re, im);
      const CMatrix R = T - lambda * CMatrix::Identity(n, n);
      const SvdResult sv = svd(R);
      const double smin = sv.sigma(sv.sigma.size() - 1);
      const double rnorm = smin > 0 ? 1.0 / smin : 1e300;
      const double ratio = rnorm / (1.0 + 1.0 / (im * im));
      row.max_resolvent = std::max(row.max_resolvent, rnorm);
      row.max_ratio = std::max(row.max_ratio, ratio);
    }
    out.kappa = std::max(out.kappa, row.max_ratio);
    out.profile.push_back(row);
  }
  return out;
}

RiccatiSolution pedersen_takesaki(const CMatrix& H, const CMatrix& K,
                                  const Tolerances& tol) {
  require_psd(H, tol, "pedersen_takesaki(H)");
  require_psd(K, tol, "pedersen_takesaki(K)");
  if (H.rows() != K.rows()) {
    throw DimensionMismatchError("pedersen_takesaki: dimension mismatch");
  }
  const CMatrix Hh = herm(H);
  const CMatrix Hs = psd_sqrt(Hh, tol);
  const CMatrix D = herm(CMatrix(Hs * herm(K) * Hs));
  const CMatrix Dhalf = psd_sqrt(D, tol);
  const CMatrix W = psd_sqrt(Dhalf, tol);

  const Subspace ranH = column_space(Hh, tol);
  if (range_leak(ranH, W) > tol.tol_eq * std::max(W.norm(), 1e-300)) {
    throw InfeasibleError("pedersen_takesaki: ran W escapes ran H");
  }

  RiccatiSolution out;
  // Smallest a with D^{1/2} ⪯ a H on ran H (generalized eigenvalue).
  const Index r = ranH.dim();
  if (r > 0) {
    const CMatrix Hr = herm(CMatrix(ranH.basis.adjoint() * Hh * ranH.basis));
    const CMatrix Dr =
        herm(CMatrix(ranH.basis.adjoint() * Dhalf * ranH.basis));
    const CMatrix Hrs = psd_sqrt(Hr, tol);
    const CMatrix Hrsi = Hrs.inverse();
    HermEig e = eig_hermitian(herm(CMatrix(Hrsi * Dr * Hrsi)), tol);
    out.a = std::max(e.values(e.values.size() - 1), 0.0);
  }

  // X = a F F^H with F the contraction of the [[aH, W], [W, 1]] block
  // matrix, which collapses to H^{†1/2} D^{1/2} H^{†1/2}.
  const CMatrix Hsp = pinv(Hs, tol);
  out.X = herm(CMatrix(Hsp * Dhalf * Hsp));
  return out;
}

}  // namespace posfact
