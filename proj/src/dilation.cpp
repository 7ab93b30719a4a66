#include "posfact/dilation.hpp"

#include "posfact/factorization.hpp"
#include "posfact/linalg.hpp"

#include <cmath>

namespace posfact {

namespace {

// [[B, B^{1/2}(1-B)^{1/2}], [(1-B)^{1/2}B^{1/2}, 1-B]] for ||B|| <= 1;
// a projection since the defining column operator is an isometry.
CMatrix projection_dilation(const CMatrix& B, const Tolerances& tol) {
  const Index n = B.rows();
  const CMatrix I = CMatrix::Identity(n, n);
  const CMatrix Bh = psd_sqrt(B, tol);
  const CMatrix Ch = psd_sqrt(herm(CMatrix(I - B)), tol);
  CMatrix out(2 * n, 2 * n);
  out.topLeftCorner(n, n) = B;
  out.topRightCorner(n, n) = Bh * Ch;
  out.bottomLeftCorner(n, n) = Ch * Bh;
  out.bottomRightCorner(n, n) = I - B;
  return herm(out);
}

Subspace leading_coordinates(Index total, Index k) {
  Subspace s;
  s.ambient_dim = total;
  s.basis = CMatrix::Identity(total, total).leftCols(k);
  return s;
}

}  // namespace

Dilation dilate_pos_proj(const CMatrix& T, const Tolerances& tol) {
  const Factorization opt = optimal_pair(T, tol);  // NotInClass passes up
  const Index n = T.rows();
  const double s = std::max(1.0, op_norm(opt.B));
  const CMatrix Bs = herm(CMatrix(opt.B / s));
  const CMatrix As = herm(CMatrix(opt.A * s));

  Dilation d;
  d.stage = DilationStage::PosProj;
  d.factor_b = projection_dilation(Bs, tol);
  d.factor_a = CMatrix::Zero(2 * n, 2 * n);
  d.factor_a.topLeftCorner(n, n) = As;
  d.ambient = d.factor_a * d.factor_b;
  d.embed = leading_coordinates(2 * n, n);
  d.scale = 1.0;  // the rebalancing folds 1/s into A, so the corner is T
  return d;
}

Dilation dilate_proj_proj(const CMatrix& T, const Tolerances& tol) {
  const Dilation d1 = dilate_pos_proj(T, tol);
  const Index m = d1.ambient.rows();
  const double c = 1.0 / std::max(1.0, op_norm(d1.factor_a));

  // Pair for c * ambient^H is (factor_b, c * factor_a): both stage-1 factors
  // are positive and factor_b is already a projection.
  const CMatrix cA = herm(CMatrix(c * d1.factor_a));
  Dilation d;
  d.stage = DilationStage::ProjProj;
  CMatrix btilde2 = projection_dilation(cA, tol);
  CMatrix atilde2 = CMatrix::Zero(2 * m, 2 * m);
  atilde2.topLeftCorner(m, m) = d1.factor_b;
  // (atilde2 * btilde2) dilates c * ambient1^H; its adjoint puts T back in
  // the corner, still a product of the same two projections.
  d.factor_a = herm(btilde2);
  d.factor_b = herm(atilde2);
  d.ambient = d.factor_a * d.factor_b;
  d.embed = leading_coordinates(2 * m, T.rows());
  d.scale = 1.0 / c;
  return d;
}

}  // namespace posfact
