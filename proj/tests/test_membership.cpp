#include "posfact/membership.hpp"

#include "posfact/factorization.hpp"

#include "doctest.h"
#include "support/generators.hpp"

#include <random>
#include <thread>

using namespace posfact;
using namespace posfact::testgen;

namespace {
const Tolerances tol;

CMatrix m2(double a, double b, double c, double d) {
  CMatrix M(2, 2);
  M << a, b, c, d;
  return M;
}

CMatrix plane_projection(double theta) {
  CMatrix P(2, 2);
  const double c = std::cos(theta), s = std::sin(theta);
  P << c * c, c * s, c * s, s * s;
  return P;
}

// Exhaustive search over 2x2 projection pairs (including rank 0 and 2) for
// the closest product to T; grid + one refinement pass. Independent of the
// residual-identity implementation.
double brute_force_proj_proj_distance(const CMatrix& T) {
  // rank-0/2 factors need no refinement
  double fixed_best = 1e300;
  const int coarse = 90;
  for (int i = 0; i < coarse; ++i) {
    const CMatrix P = plane_projection(M_PI * i / coarse);
    for (const CMatrix& other :
         {CMatrix(CMatrix::Zero(2, 2)), CMatrix(CMatrix::Identity(2, 2))}) {
      fixed_best = std::min(fixed_best, (P * other - T).norm());
      fixed_best = std::min(fixed_best, (other * P - T).norm());
    }
  }
  fixed_best = std::min(fixed_best, (CMatrix::Identity(2, 2) - T).norm());
  fixed_best = std::min(fixed_best, T.norm());

  // rank-1 x rank-1 pairs: coarse grid, then refine around the best pair
  double best = 1e300, best_a = 0, best_b = 0;
  for (int i = 0; i < coarse; ++i) {
    const double a = M_PI * i / coarse;
    for (int j = 0; j < coarse; ++j) {
      const double b = M_PI * j / coarse;
      const double d = (plane_projection(a) * plane_projection(b) - T).norm();
      if (d < best) {
        best = d;
        best_a = a;
        best_b = b;
      }
    }
  }
  for (int level = 0; level < 14; ++level) {
    const double span = M_PI / coarse / std::pow(3.0, level);
    const double la = best_a, lb = best_b;
    for (int i = -6; i <= 6; ++i) {
      for (int j = -6; j <= 6; ++j) {
        const double a = la + span * i / 6.0;
        const double b = lb + span * j / 6.0;
        const double d = (plane_projection(a) * plane_projection(b) - T).norm();
        if (d < best) {
          best = d;
          best_a = a;
          best_b = b;
        }
      }
    }
  }
  return std::min(best, fixed_best);
}

}  // namespace

TEST_CASE("is_l2p examples") {
  {
    const MembershipVerdict v = is_l2p(m2(0, 1, 0, 0), tol);
    CHECK_FALSE(v.in_l2p);
    CHECK(v.subclass == Subclass::Outside);
    CHECK_FALSE(v.witness.has_value());
  }
  {
    const MembershipVerdict v = is_l2p(m2(-1, 0, 0, 2), tol);
    CHECK_FALSE(v.in_l2p);
  }
  {
    const MembershipVerdict v = is_l2p(m2(1, 1, 0, 0), tol);
    REQUIRE(v.in_l2p);
    REQUIRE(v.witness.has_value());
    CHECK((v.witness->A - m2(1, 0, 0, 0)).norm() <= 1e-10);
    CHECK((v.witness->B - m2(1, 1, 1, 1)).norm() <= 1e-10);
    CHECK(v.witness->residual <= tol.tol_eq * m2(1, 1, 0, 0).norm());
    CHECK(v.confidence == Confidence::Firm);
  }
  CHECK_THROWS_AS(is_l2p(CMatrix::Zero(2, 3), tol), NotSquareError);
}

TEST_CASE("classify_subclass examples") {
  CHECK(classify_subclass(m2(1, 0, 0, 0), tol).subclass == Subclass::ProjProj);
  CHECK(classify_subclass(m2(1, 1, 0, 0), tol).subclass == Subclass::PosProj);
  CHECK(classify_subclass(m2(1, 0, 1, 0), tol).subclass == Subclass::PosProj);
  CHECK(classify_subclass(m2(2, 0, 0, 3), tol).subclass == Subclass::PosProj);
  CHECK(classify_subclass(m2(0, 1, 0, 0), tol).subclass == Subclass::Outside);
  {
    // similar to diag(1,4) by a shear: a member beyond PosProj
    CMatrix G = m2(1, 1, 0, 1);
    CMatrix T = G * m2(1, 0, 0, 4) * G.inverse();
    CHECK(classify_subclass(T, tol).subclass == Subclass::General);
  }
}

TEST_CASE("ProjProj residual test agrees with brute force on a 2x2 grid") {
  for (int i = 0; i < 12; ++i) {
    for (int j = 0; j < 12; ++j) {
      for (double s : {0.4, 1.0, 1.7}) {
        const double a = M_PI * i / 12.0;
        const double b = M_PI * j / 12.0;
        const CMatrix T = s * plane_projection(a) * plane_projection(b);
        // products at machine scale are ambiguous either way
        if (T.norm() < 1e-12) continue;
        // scale-relative acceptance, matching the residual test's scaling
        const bool oracle = brute_force_proj_proj_distance(T) <=
                            1e-5 * T.norm();
        CHECK(proj_proj_test(T, tol) == oracle);
      }
    }
  }
}

TEST_CASE("products of projections classify ProjProj; PSD x projection stays PosProj or below") {
  std::mt19937_64 rng(29);
  for (int it = 0; it < 500; ++it) {
    const Index n = 2 + static_cast<Index>(rng() % 5);
    const CMatrix P = random_projection(n, 1 + rng() % n, rng);
    const CMatrix Q = random_projection(n, 1 + rng() % n, rng);
    const MembershipVerdict v = classify_subclass(CMatrix(P * Q), tol);
    CHECK(v.in_l2p);
    CHECK(v.subclass == Subclass::ProjProj);
  }
  for (int it = 0; it < 500; ++it) {
    const Index n = 2 + static_cast<Index>(rng() % 5);
    const CMatrix A = random_psd(n, rng, n - rng() % 2);
    const CMatrix P = random_projection(n, 1 + rng() % n, rng);
    const MembershipVerdict v = classify_subclass(CMatrix(A * P), tol);
    CHECK(v.in_l2p);
    CHECK((v.subclass == Subclass::ProjProj || v.subclass == Subclass::PosProj));
  }
}

TEST_CASE("products of two PSD matrices are members with the right spectrum") {
  std::mt19937_64 rng(31);
  for (int it = 0; it < 150; ++it) {
    const Index n = 1 + static_cast<Index>(rng() % 8);
    const CMatrix A = random_psd(n, rng, n - rng() % 2);
    const CMatrix B = random_psd(n, rng, n - rng() % 2);
    const CMatrix T = A * B;
    const MembershipVerdict v = is_l2p(T, tol);
    CHECK(v.in_l2p);
    const double scale = std::max(op_norm(T), 1e-12);
    for (const auto& c : v.spectrum.clusters) {
      CHECK(c.eigenvalue.real() >= -tol.tol_psd * scale);
      CHECK(std::abs(c.eigenvalue.imag()) <= tol.tol_psd * scale);
    }
    // σ(AB) must match σ(A^{1/2} B A^{1/2}) as multisets.
    const CMatrix Ah = psd_sqrt(A, tol);
    const HermEig sym = eig_hermitian(CMatrix(Ah * B * Ah), tol);
    const GeneralEig gen = eig_decomposition(T);
    for (Index k = 0; k < n; ++k) {
      CHECK(std::abs(gen.values(k) - Complex(sym.values(k), 0)) <=
            1e-7 * std::max(scale, 1.0));
    }
    // ran T ∩ ker T = {0}
    const RangeKernel rk = range_kernel(T, tol);
    CHECK(subspace_ops(rk.range, rk.kernel, tol).intersection.dim() == 0);
  }
}

TEST_CASE("membership is adjoint- and similarity-invariant") {
  std::mt19937_64 rng(37);
  for (int it = 0; it < 100; ++it) {
    const Index n = 2 + static_cast<Index>(rng() % 5);
    CMatrix T;
    if (it % 3 == 0) {
      T = ginibre(n, n, rng);  // almost surely not a member
    } else {
      T = random_member(n, rng, rng() % 2);
    }
    const bool base = is_l2p(T, tol).in_l2p;
    CHECK(is_l2p(CMatrix(T.adjoint()), tol).in_l2p == base);
    const CMatrix G = random_conditioned(n, rng, 10.0);
    CHECK(is_l2p(CMatrix(G * T * G.inverse()), tol).in_l2p == base);
  }
}

TEST_CASE("feasibility_lambda examples") {
  CHECK(feasibility_lambda(m2(1, 0, 0, 0), m2(1, 1, 0, 0), tol) ==
        doctest::Approx(2.0));
  CHECK(feasibility_lambda(CMatrix::Identity(2, 2), CMatrix::Identity(2, 2),
                           tol) == doctest::Approx(1.0));
  CHECK_THROWS_AS(feasibility_lambda(m2(1, 0, 0, 0), m2(0, 0, 0, 1), tol),
                  InfeasibleError);
  CHECK_THROWS_AS(feasibility_lambda(m2(-1, 0, 0, 1), m2(1, 0, 0, 0), tol),
                  NotPsdError);
}

TEST_CASE("near-defective inputs surface near_boundary instead of a guess") {
  {
    // eigenvalue gap far below tol_cluster·||T||: the merged cluster hides
    // a near-defective pair, rejected outright
    CMatrix T(2, 2);
    T << 1.0, 1e9, 0.0, 2.0;
    const MembershipVerdict v = is_l2p(T, tol);
    CHECK_FALSE(v.in_l2p);
  }
  {
    // within a decade below cond_max: member, but flagged
    CMatrix T(2, 2);
    T << 1.0, 1.0, 0.0, 1.0 + 1e-7;
    const MembershipVerdict v = is_l2p(T, tol);
    CHECK(v.in_l2p);
    CHECK(v.confidence == Confidence::NearBoundary);
  }
  {
    // a genuinely defective matrix is a firm rejection
    const MembershipVerdict v = is_l2p(m2(0, 1, 0, 0), tol);
    CHECK_FALSE(v.in_l2p);
    CHECK(v.confidence == Confidence::Firm);
  }
}

TEST_CASE("membership is safe to call concurrently") {
  std::vector<CMatrix> inputs;
  std::mt19937_64 rng(179);
  for (int i = 0; i < 16; ++i) {
    inputs.push_back(i % 2 ? random_member(5, rng, 1)
                           : CMatrix(ginibre(5, 5, rng)));
  }
  std::vector<int> expected;
  for (const auto& T : inputs) expected.push_back(is_l2p(T, tol).in_l2p);

  std::vector<int> got(inputs.size(), -1);
  std::vector<std::thread> workers;
  for (int w = 0; w < 4; ++w) {
    workers.emplace_back([&, w] {
      for (size_t i = w; i < inputs.size(); i += 4) {
        got[i] = is_l2p(inputs[i], tol).in_l2p;
      }
    });
  }
  for (auto& t : workers) t.join();
  for (size_t i = 0; i < inputs.size(); ++i) CHECK(got[i] == expected[i]);
}
