#include "posfact/linalg.hpp"

#include "doctest.h"
#include "support/generators.hpp"

#include <random>

using namespace posfact;
using namespace posfact::testgen;

namespace {
const Tolerances tol;

CMatrix m2(double a, double b, double c, double d) {
  CMatrix M(2, 2);
  M << a, b, c, d;
  return M;
}
}  // namespace

TEST_CASE("eig_hermitian on diagonal and symmetric inputs") {
  {
    const HermEig e = eig_hermitian(m2(2, 0, 0, 1), tol);
    CHECK(e.values(0) == doctest::Approx(1.0));
    CHECK(e.values(1) == doctest::Approx(2.0));
  }
  {
    const HermEig e = eig_hermitian(m2(0, 1, 1, 0), tol);
    CHECK(e.values(0) == doctest::Approx(-1.0));
    CHECK(e.values(1) == doctest::Approx(1.0));
    const double s = 1.0 / std::sqrt(2.0);
    CHECK((e.vectors.col(0) - (CVector(2) << s, -s).finished()).norm() ==
          doctest::Approx(0.0).epsilon(1e-12));
    CHECK((e.vectors.col(1) - (CVector(2) << s, s).finished()).norm() ==
          doctest::Approx(0.0).epsilon(1e-12));
  }
  CHECK_THROWS_AS(eig_hermitian(CMatrix::Zero(2, 3), tol), NotSquareError);
  CHECK_THROWS_AS(eig_hermitian(m2(0, 1, 0, 0), tol), NotHermitianError);
}

TEST_CASE("eig_hermitian reconstruction on random Hermitian 6x6") {
  std::mt19937_64 rng(7);
  for (int it = 0; it < 50; ++it) {
    const CMatrix M = herm(ginibre(6, 6, rng));
    const HermEig e = eig_hermitian(M, tol);
    const CMatrix R =
        e.vectors * e.values.cast<Complex>().asDiagonal() * e.vectors.adjoint();
    CHECK((R - M).norm() <= 1e-12 * M.norm());
    CHECK((e.vectors.adjoint() * e.vectors - CMatrix::Identity(6, 6)).norm() <=
          1e-12);
  }
}

TEST_CASE("eig_general verdicts") {
  {
    const SpectrumReport r = eig_general(m2(0, 1, 0, 0), tol);
    REQUIRE(r.clusters.size() == 1);
    CHECK(r.clusters[0].algebraic_mult == 2);
    CHECK(r.clusters[0].geometric_mult == 1);
    CHECK_FALSE(r.diagonalizable);
    CHECK(r.spectrum_nonneg);
  }
  {
    const SpectrumReport r = eig_general(CMatrix::Identity(3, 3), tol);
    REQUIRE(r.clusters.size() == 1);
    CHECK(r.clusters[0].algebraic_mult == 3);
    CHECK(r.clusters[0].geometric_mult == 3);
    CHECK(r.diagonalizable);
    CHECK(r.spectrum_nonneg);
  }
  {
    // distinct eigenvalues force diagonalizability
    const SpectrumReport r = eig_general(m2(2, 1, 0, 1), tol);
    REQUIRE(r.clusters.size() == 2);
    CHECK(r.clusters[0].eigenvalue.real() == doctest::Approx(1.0));
    CHECK(r.clusters[1].eigenvalue.real() == doctest::Approx(2.0));
    CHECK(r.diagonalizable);
  }
  {
    const SpectrumReport r = eig_general(m2(-1, 0, 0, 2), tol);
    CHECK_FALSE(r.spectrum_nonneg);
  }
}

TEST_CASE("psd_sqrt examples and property") {
  CHECK((psd_sqrt(m2(4, 0, 0, 9), tol) - m2(2, 0, 0, 3)).norm() <= 1e-12);
  const double s = 1.0 / std::sqrt(2.0);
  CHECK((psd_sqrt(m2(1, 1, 1, 1), tol) - s * m2(1, 1, 1, 1)).norm() <= 1e-12);
  CHECK(psd_sqrt(CMatrix::Zero(3, 3), tol).norm() == 0.0);
  CHECK_THROWS_AS(psd_sqrt(m2(-1, 0, 0, 1), tol), NotPsdError);

  std::mt19937_64 rng(11);
  for (int it = 0; it < 1000; ++it) {
    const Index n = 1 + static_cast<Index>(rng() % 12);
    const CMatrix M = random_psd(n, rng, n - static_cast<Index>(rng() % 2));
    const CMatrix R = psd_sqrt(M, tol);
    CHECK((R * R - M).norm() <= tol.tol_eq * std::max(M.norm(), 1e-12));
  }
}

TEST_CASE("pinv examples, Penrose conditions, involution") {
  CHECK((pinv(m2(2, 0, 0, 0), tol) - m2(0.5, 0, 0, 0)).norm() <= 1e-14);
  CHECK((pinv(m2(1, 1, 0, 0), tol) - 0.5 * m2(1, 0, 1, 0)).norm() <= 1e-14);
  CHECK((pinv(CMatrix::Identity(4, 4), tol) - CMatrix::Identity(4, 4)).norm() <=
        1e-14);

  std::mt19937_64 rng(13);
  for (int it = 0; it < 200; ++it) {
    const Index rows = 1 + static_cast<Index>(rng() % 7);
    const Index cols = 1 + static_cast<Index>(rng() % 7);
    CMatrix M = ginibre(rows, cols, rng);
    if (it % 3 == 0 && rows > 1 && cols > 1) {
      M.col(cols - 1) = M.col(0);  // rank deficiency
    }
    const CMatrix P = pinv(M, tol);
    const double scale = std::max(M.norm(), 1e-12);
    CHECK((M * P * M - M).norm() <= tol.tol_eq * scale);
    CHECK((P * M * P - P).norm() <= tol.tol_eq * std::max(P.norm(), 1e-12));
    CHECK((M * P - (M * P).adjoint()).norm() <= tol.tol_eq);
    CHECK((P * M - (P * M).adjoint()).norm() <= tol.tol_eq);
    CHECK((pinv(P, tol) - M).norm() <= tol.tol_eq * scale);
  }
}

TEST_CASE("range_kernel examples and rank symmetry") {
  {
    const RangeKernel rk = range_kernel(m2(1, 1, 0, 0), tol);
    REQUIRE(rk.range.dim() == 1);
    REQUIRE(rk.kernel.dim() == 1);
    CHECK(std::abs(rk.range.basis(0, 0)) == doctest::Approx(1.0));
    CHECK(std::abs(rk.range.basis(1, 0)) == doctest::Approx(0.0));
    const double s = 1.0 / std::sqrt(2.0);
    CHECK((rk.kernel.basis.col(0) - (CVector(2) << s, -s).finished()).norm() <=
          1e-12);
  }
  {
    const RangeKernel rk = range_kernel(CMatrix::Zero(3, 3), tol);
    CHECK(rk.range.dim() == 0);
    CHECK(rk.kernel.dim() == 3);
  }
  {
    std::mt19937_64 rng(5);
    const CMatrix U = random_unitary(4, rng);
    const RangeKernel rk = range_kernel(U, tol);
    CHECK(rk.range.dim() == 4);
    CHECK(rk.kernel.dim() == 0);
  }
  std::mt19937_64 rng(17);
  for (int it = 0; it < 300; ++it) {
    const Index rows = 1 + static_cast<Index>(rng() % 6);
    const Index cols = 1 + static_cast<Index>(rng() % 6);
    CMatrix M = ginibre(rows, cols, rng);
    if (it % 2) M.row(0).setZero();
    const auto a = range_kernel(M, tol);
    const auto b = range_kernel(CMatrix(M.adjoint()), tol);
    CHECK(a.range.dim() == b.range.dim());
    CHECK(a.range.dim() + a.kernel.dim() == cols);
  }
}

TEST_CASE("subspace_ops examples") {
  Subspace e1 = Subspace::zero(2), e2 = Subspace::zero(2), diag = Subspace::zero(2);
  e1.basis = CMatrix::Identity(2, 2).leftCols(1);
  e2.basis = CMatrix::Identity(2, 2).rightCols(1);
  diag.basis = (CMatrix(2, 1) << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0))
                   .finished();
  {
    const auto r = subspace_ops(e1, e1, tol);
    CHECK(r.intersection.dim() == 1);
    CHECK(r.sum.dim() == 1);
    CHECK(r.principal_angles[0] == doctest::Approx(0.0));
  }
  {
    const auto r = subspace_ops(e1, e2, tol);
    CHECK(r.intersection.dim() == 0);
    CHECK(r.sum.dim() == 2);
    CHECK(r.principal_angles[0] == doctest::Approx(M_PI / 2));
  }
  {
    const auto r = subspace_ops(e1, diag, tol);
    CHECK(r.intersection.dim() == 0);
    CHECK(r.principal_angles[0] == doctest::Approx(M_PI / 4));
  }
  Subspace bad = Subspace::zero(3);
  CHECK_THROWS_AS(subspace_ops(e1, bad, tol), DimensionMismatchError);
}

TEST_CASE("subspace dimension formula on random pairs") {
  std::mt19937_64 rng(19);
  for (int it = 0; it < 1000; ++it) {
    const Index n = 2 + static_cast<Index>(rng() % 6);
    const Index ku = static_cast<Index>(rng() % (n + 1));
    const Index kv = static_cast<Index>(rng() % (n + 1));
    const Subspace U = random_subspace(n, ku, rng);
    Subspace V = random_subspace(n, kv, rng);
    if (it % 4 == 0 && ku > 0 && kv > 0) {
      V.basis.col(0) = U.basis.col(0);  // force a shared direction
      V = column_space(V.basis, tol);
    }
    const auto r = subspace_ops(U, V, tol);
    CHECK(r.intersection.dim() + r.sum.dim() == ku + V.dim());
  }
}

TEST_CASE("douglas_solve examples, minimal norm") {
  {
    const CMatrix X = douglas_solve(m2(1, 0, 0, 0), m2(0.5, 0, 0, 0), tol);
    CHECK((X - m2(0.5, 0, 0, 0)).norm() <= 1e-12);
  }
  CHECK_THROWS_AS(douglas_solve(m2(1, 0, 0, 0), m2(0, 0, 1, 0), tol),
                  RangeNotContainedError);
  {
    const CMatrix A = m2(1, 1, 1, 1);
    const CMatrix T = m2(2, 2, 2, 2);
    const CMatrix X = douglas_solve(A, T, tol);
    CHECK((A * X - T).norm() <= 1e-10);
  }

  // Minimal Frobenius norm among solutions: adding kernel directions can
  // only grow the norm.
  std::mt19937_64 rng(23);
  for (int it = 0; it < 100; ++it) {
    const Index n = 3 + static_cast<Index>(rng() % 4);
    const CMatrix A = random_psd(n, rng, n - 1);
    const CMatrix W = ginibre(n, n, rng);
    const CMatrix T = A * W;  // guarantees ran T ⊆ ran A
    const CMatrix X = douglas_solve(A, T, tol);
    CHECK((A * X - T).norm() <= tol.tol_eq * (A.norm() + T.norm()));
    const Subspace kerA = range_kernel(A, tol).kernel;
    REQUIRE(kerA.dim() >= 1);
    const CMatrix K = kerA.basis * ginibre(kerA.dim(), n, rng);
    CHECK((A * (X + K) - T).norm() <= 10 * tol.tol_eq * (A.norm() + T.norm()));
    CHECK(X.norm() <= (X + K).norm() + 1e-9);
  }
}
