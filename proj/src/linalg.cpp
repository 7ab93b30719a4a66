#include "posfact/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numeric>

namespace posfact {

const char* to_string(Subclass s) {
  switch (s) {
    case Subclass::ProjProj: return "ProjProj";
    case Subclass::PosProj: return "PosProj";
    case Subclass::General: return "General";
    case Subclass::Outside: return "Outside";
  }
  return "?";
}

const char* to_string(Confidence c) {
  return c == Confidence::Firm ? "firm" : "near_boundary";
}

const char* to_string(PairOrder o) {
  switch (o) {
    case PairOrder::Less: return "Less";
    case PairOrder::Greater: return "Greater";
    case PairOrder::Equal: return "Equal";
    case PairOrder::Incomparable: return "Incomparable";
  }
  return "?";
}

void ensure_finite(const CMatrix& M, const std::string& what) {
  if (!M.allFinite()) {
    throw NotFiniteError(what + ": matrix has non-finite entries");
  }
}

void ensure_square(const CMatrix& M, const std::string& what) {
  if (M.rows() != M.cols() || M.rows() < 1) {
    throw NotSquareError(what + ": expected a square matrix, got " +
                         std::to_string(M.rows()) + "x" +
                         std::to_string(M.cols()));
  }
}

double fro_norm(const CMatrix& M) { return M.norm(); }

RVector singular_values(const CMatrix& M) {
  if (M.size() == 0) return RVector::Zero(0);
  if (M.rows() <= 32 && M.cols() <= 32) {
    return Eigen::JacobiSVD<CMatrix>(M).singularValues();
  }
  return Eigen::BDCSVD<CMatrix>(M).singularValues();
}

double op_norm(const CMatrix& M) {
  if (M.size() == 0) return 0.0;
  return singular_values(M)(0);
}

CMatrix herm(const CMatrix& M) { return 0.5 * (M + M.adjoint()); }

CMatrix herm_checked(const CMatrix& M, const Tolerances& tol,
                     const std::string& what) {
  ensure_square(M, what);
  const double asym = (M - M.adjoint()).norm();
  if (asym > tol.tol_eq * std::max(M.norm(), 1e-300) && asym > 0) {
    throw NotHermitianError(what + ": asymmetry " + std::to_string(asym) +
                            " exceeds tol_eq * ||M||");
  }
  return herm(M);
}

// Rotate a vector's phase so its first component of largest modulus is
// real positive. Deterministic, diffable outputs.
static void sign_fix(Eigen::Ref<CVector> v) {
  Index imax = 0;
  double best = -1.0;
  for (Index i = 0; i < v.size(); ++i) {
    const double a = std::abs(v(i));
    if (a > best * (1.0 + 1e-12)) {
      best = a;
      imax = i;
    }
  }
  if (best <= 0.0) return;
  const Complex phase = std::conj(v(imax)) / best;
  v *= phase;
  v(imax) = Complex(std::abs(v(imax)), 0.0);
}

static void sign_fix_columns(CMatrix& M) {
  for (Index j = 0; j < M.cols(); ++j) {
    auto col = M.col(j);
    sign_fix(col);
  }
}

Index SvdResult::rank(double tol_rank) const {
  if (sigma.size() == 0) return 0;
  const double cut = tol_rank * sigma(0);
  Index r = 0;
  while (r < sigma.size() && sigma(r) > cut) ++r;
  return r;
}

static Index rank_at(const SvdResult& s, double tol_rank, double scale_floor) {
  if (s.sigma.size() == 0) return 0;
  const double cut = tol_rank * std::max(s.sigma(0), scale_floor);
  Index r = 0;
  while (r < s.sigma.size() && s.sigma(r) > cut) ++r;
  return r;
}

SvdResult svd(const CMatrix& M) {
  SvdResult out;
  if (M.rows() == 0 || M.cols() == 0) {
    out.U = CMatrix::Identity(M.rows(), M.rows());
    out.sigma = RVector::Zero(0);
    out.V = CMatrix::Identity(M.cols(), M.cols());
    return out;
  }
  if (M.rows() <= 32 && M.cols() <= 32) {
    Eigen::JacobiSVD<CMatrix> s(M, Eigen::ComputeFullU | Eigen::ComputeFullV);
    out.U = s.matrixU();
    out.sigma = s.singularValues();
    out.V = s.matrixV();
  } else {
    Eigen::BDCSVD<CMatrix> s(M, Eigen::ComputeFullU | Eigen::ComputeFullV);
    out.U = s.matrixU();
    out.sigma = s.singularValues();
    out.V = s.matrixV();
  }
  return out;
}

HermEig eig_hermitian(const CMatrix& M, const Tolerances& tol) {
  const CMatrix H = herm_checked(M, tol, "eig_hermitian");
  Eigen::SelfAdjointEigenSolver<CMatrix> es(H);
  if (es.info() != Eigen::Success) {
    throw Error("eig_hermitian: eigensolver failed");
  }
  HermEig out;
  out.values = es.eigenvalues();  // ascending
  out.vectors = es.eigenvectors();
  sign_fix_columns(out.vectors);
  return out;
}

GeneralEig eig_decomposition(const CMatrix& T, const Tolerances& tol) {
  ensure_square(T, "eig_decomposition");
  ensure_finite(T, "eig_decomposition");
  Eigen::ComplexEigenSolver<CMatrix> es(T);
  if (es.info() != Eigen::Success) {
    throw Error("eig_decomposition: eigensolver failed");
  }
  const Index n = T.rows();
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  const CVector& vals = es.eigenvalues();
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (vals(a).real() != vals(b).real())
      return vals(a).real() < vals(b).real();
    return vals(a).imag() < vals(b).imag();
  });
  GeneralEig out;
  out.values.resize(n);
  out.vectors.resize(n, n);
  for (Index j = 0; j < n; ++j) {
    out.values(j) = vals(order[j]);
    CVector v = es.eigenvectors().col(order[j]);
    const double nv = v.norm();
    if (nv > 0) v /= nv;
    out.vectors.col(j) = v;
  }

  const double anchor = op_norm(T);
  const double width = tol.tol_cluster * anchor;
  for (const auto& group : cluster_indices(out.values, width)) {
    if (group.size() < 2) continue;
    Complex mean = 0;
    for (int idx : group) mean += out.values(idx);
    mean /= static_cast<double>(group.size());
    double radius = 0.0;
    for (int idx : group) {
      radius = std::max(radius, std::abs(out.values(idx) - mean));
    }
    if (radius > 1e-11 * anchor) continue;  // genuinely distinct: keep raw
    const CMatrix shifted = T - mean * CMatrix::Identity(n, n);
    const Subspace ker = range_kernel(shifted, tol, anchor).kernel;
    if (ker.dim() != static_cast<Index>(group.size())) continue;
    for (size_t k = 0; k < group.size(); ++k) {
      out.vectors.col(group[k]) = ker.basis.col(static_cast<Index>(k));
      out.values(group[k]) = mean;
    }
  }
  sign_fix_columns(out.vectors);
  return out;
}

std::vector<std::vector<int>> cluster_indices(const CVector& values,
                                              double width) {
  const int n = static_cast<int>(values.size());
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  std::function<int(int)> find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (std::abs(values(i) - values(j)) <= width) {
        parent[find(i)] = find(j);
      }
  std::map<int, std::vector<int>> groups;
  for (int i = 0; i < n; ++i) groups[find(i)].push_back(i);
  std::vector<std::vector<int>> out;
  for (auto& [root, idx] : groups) out.push_back(std::move(idx));
  std::sort(out.begin(), out.end(), [&](const auto& a, const auto& b) {
    Complex ma = 0, mb = 0;
    for (int i : a) ma += values(i);
    for (int i : b) mb += values(i);
    ma /= static_cast<double>(a.size());
    mb /= static_cast<double>(b.size());
    if (ma.real() != mb.real()) return ma.real() < mb.real();
    return ma.imag() < mb.imag();
  });
  return out;
}

SpectrumReport eig_general(const CMatrix& T, const Tolerances& tol) {
  ensure_square(T, "eig_general");
  ensure_finite(T, "eig_general");
  const Index n = T.rows();
  const GeneralEig eg = eig_decomposition(T, tol);
  const double scale = op_norm(T);

  SpectrumReport rep;
  const auto groups = cluster_indices(eg.values, tol.tol_cluster * scale);
  int geo_total = 0;
  rep.spectrum_nonneg = true;
  for (const auto& g : groups) {
    EigenCluster c;
    Complex mean = 0;
    for (int i : g) mean += eg.values(i);
    mean /= static_cast<double>(g.size());
    c.eigenvalue = mean;
    c.algebraic_mult = static_cast<int>(g.size());
    double radius = 0.0;
    for (int i : g) radius = std::max(radius, std::abs(eg.values(i) - mean));
    // Semisimple cluster directions sit at sigma ~ radius; a Jordan block
    // pushes all but one of its singular values up to O(||T||).
    const CMatrix shifted = T - mean * CMatrix::Identity(n, n);
    const RVector sigma = singular_values(shifted);
    const double cut = std::max(
        tol.tol_rank * std::max(sigma.size() ? sigma(0) : 0.0, scale),
        3.0 * radius);
    int geo = 0;
    for (Index i = 0; i < sigma.size(); ++i) {
      if (sigma(i) <= cut) ++geo;
    }
    if (geo > c.algebraic_mult) {
      rep.kernel_overcount = true;
      geo = c.algebraic_mult;
    }
    c.geometric_mult = geo;
    geo_total += c.geometric_mult;
    if (c.eigenvalue.real() < -tol.tol_psd * scale ||
        std::abs(c.eigenvalue.imag()) > tol.tol_psd * scale) {
      rep.spectrum_nonneg = false;
    }
    rep.clusters.push_back(c);
  }

  const SvdResult gs = svd(eg.vectors);
  const double smin = gs.sigma(gs.sigma.size() - 1);
  rep.eigvec_cond = smin > 0 ? gs.sigma(0) / smin : 1e300;
  rep.eigvec_cond = std::min(rep.eigvec_cond, 1e300);
  rep.diagonalizable = (geo_total == n) && (rep.eigvec_cond <= tol.cond_max);
  return rep;
}

CMatrix psd_sqrt(const CMatrix& M, const Tolerances& tol) {
  HermEig he = eig_hermitian(M, tol);
  const double scale =
      std::max(std::abs(he.values(0)), std::abs(he.values(he.values.size() - 1)));
  RVector s = he.values;
  for (Index i = 0; i < s.size(); ++i) {
    if (s(i) < -tol.tol_psd * scale) {
      throw NotPsdError("psd_sqrt: eigenvalue " + std::to_string(s(i)) +
                        " below the PSD floor");
    }
    // Eigenvalues at rounding level are true zeros smeared by the solver;
    // taking their square root would turn eps-noise into sqrt(eps)-noise.
    if (s(i) <= 1e-13 * scale) s(i) = 0.0;
    s(i) = std::sqrt(std::max(s(i), 0.0));
  }
  CMatrix R = he.vectors * s.asDiagonal() * he.vectors.adjoint();
  return herm(R);
}

CMatrix pinv(const CMatrix& M, const Tolerances& tol) {
  ensure_finite(M, "pinv");
  const SvdResult s = svd(M);
  const Index r = s.rank(tol.tol_rank);
  CMatrix out = CMatrix::Zero(M.cols(), M.rows());
  for (Index i = 0; i < r; ++i) {
    out += (1.0 / s.sigma(i)) * s.V.col(i) * s.U.col(i).adjoint();
  }
  return out;
}

RangeKernel range_kernel(const CMatrix& M, const Tolerances& tol,
                         double scale_floor) {
  ensure_finite(M, "range_kernel");
  const SvdResult s = svd(M);
  const Index r = rank_at(s, tol.tol_rank, scale_floor);
  RangeKernel out;
  out.range.ambient_dim = M.rows();
  out.range.basis = s.U.leftCols(r);
  out.kernel.ambient_dim = M.cols();
  out.kernel.basis = s.V.rightCols(M.cols() - r);
  sign_fix_columns(out.range.basis);
  sign_fix_columns(out.kernel.basis);
  return out;
}

Subspace column_space(const CMatrix& M, const Tolerances& tol) {
  return range_kernel(M, tol).range;
}

Subspace complement(const Subspace& S) {
  const Index n = S.ambient_dim;
  CMatrix P = CMatrix::Identity(n, n) - S.basis * S.basis.adjoint();
  const SvdResult s = svd(P);
  Subspace out;
  out.ambient_dim = n;
  out.basis = s.U.leftCols(n - S.dim());
  sign_fix_columns(out.basis);
  return out;
}

CMatrix projector(const Subspace& S) {
  return S.basis * S.basis.adjoint();
}

double range_leak(const Subspace& S, const CMatrix& M) {
  return (M - S.basis * (S.basis.adjoint() * M)).norm();
}

SubspaceRelation subspace_ops(const Subspace& U, const Subspace& V,
                              const Tolerances& tol) {
  if (U.ambient_dim != V.ambient_dim) {
    throw DimensionMismatchError("subspace_ops: ambient dimensions differ");
  }
  const Index n = U.ambient_dim;
  SubspaceRelation out;

  // Intersection: kernel of the stacked projector complements. Projectors
  // have unit scale, which anchors the cutoff when the stack degenerates.
  CMatrix stacked(2 * n, n);
  stacked.topRows(n) = CMatrix::Identity(n, n) - projector(U);
  stacked.bottomRows(n) = CMatrix::Identity(n, n) - projector(V);
  out.intersection = range_kernel(stacked, tol, 1.0).kernel;
  out.intersection.ambient_dim = n;

  // Sum: column concatenation + orthonormalization.
  CMatrix cat(n, U.dim() + V.dim());
  cat.leftCols(U.dim()) = U.basis;
  cat.rightCols(V.dim()) = V.basis;
  out.sum = cat.cols() > 0 ? column_space(cat, tol) : Subspace::zero(n);

  // Principal angles: arccos of the singular values of U^H V.
  if (U.dim() > 0 && V.dim() > 0) {
    const SvdResult s = svd(CMatrix(U.basis.adjoint() * V.basis));
    for (Index i = s.sigma.size(); i-- > 0;) {
      const double c = std::clamp(s.sigma(i), 0.0, 1.0);
      out.principal_angles.push_back(std::acos(c));
    }
    std::sort(out.principal_angles.begin(), out.principal_angles.end());
  }
  return out;
}

double subspace_gap(const Subspace& U, const Subspace& V) {
  if (U.dim() != V.dim()) return M_PI / 2.0;
  if (U.dim() == 0) return 0.0;
  // sin of the largest principal angle; the cosine route loses half the
  // digits near zero angle.
  const CMatrix resid = V.basis - U.basis * (U.basis.adjoint() * V.basis);
  const double s = std::clamp(op_norm(resid), 0.0, 1.0);
  return std::asin(s);
}

CMatrix douglas_solve(const CMatrix& A, const CMatrix& T,
                      const Tolerances& tol) {
  if (A.rows() != T.rows()) {
    throw DimensionMismatchError("douglas_solve: row counts differ");
  }
  const Subspace ranA = column_space(A, tol);
  const double leak = range_leak(ranA, T);
  if (leak > tol.tol_eq * std::max(T.norm(), 1e-300)) {
    throw RangeNotContainedError(
        "douglas_solve: ran T not contained in ran A (leak " +
        std::to_string(leak) + ")");
  }
  return pinv(A, tol) * T;
}

}  // namespace posfact
