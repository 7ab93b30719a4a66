#pragma once

#include "posfact/types.hpp"

#include <map>
#include <string>
#include <vector>

namespace posfact {

struct MetricRow {
  int dim = 0;
  std::string metric;
  double value = 0.0;
};

struct LabResult {
  std::string name;
  std::vector<int> dims;
  std::vector<MetricRow> metrics;          // one row per (dim, metric)
  std::map<std::string, CMatrix> matrices; // optional serialized witnesses
  std::string verdicts;
};

struct GalleryItem {
  std::string name;
  CMatrix matrix;
  std::map<std::string, CMatrix> witnesses;
  std::string certificate;  // human-readable summary of the checks run
};

struct GalleryParams {
  // oblique_projection: column spans of ran Q and ker Q
  std::optional<CMatrix> basis_m;
  std::optional<CMatrix> basis_n;
  // nonunique_minimal
  double r = 2.0;
};

/// Named example operators with their certified properties:
///   oblique_projection, three_positive_nilpotent, nonunique_minimal.
GalleryItem gallery(const std::string& name, const GalleryParams& params,
                    const Tolerances& tol);

/// Finite truncations of the quasi-similar-but-not-similar product of two
/// projections: T_n = P_M P_{N⊥} with N tilted into the second half by the
/// angle schedule. Tracks the diagonalizing condition number κ(G_n).
LabResult qs_not_sim_truncation(const std::vector<int>& dims,
                                const std::vector<double>& angles,
                                const Tolerances& tol);

/// Finite truncations of the member with no square root in the limit:
/// T_n = [[S, 0], [(1-S)^{1/2} S^{1/2}, 0]]. Tracks the norm of the inverse
/// of the invertible square-root witness factor.
LabResult sqrtless_truncation(const std::vector<int>& dims,
                              const std::vector<double>& s_schedule,
                              const Tolerances& tol);

/// Finite rendering of the compact construction: eigenspace blocks at
/// prescribed mutual angles, X with weights sqrt(λ_n), C the block diagonal,
/// and the factorization T = (X X^H)(Z Z^H) from a Douglas solve.
LabResult compact_factor_truncation(const std::vector<double>& lambdas,
                                    const std::vector<int>& block_dims,
                                    const std::vector<double>& angles_deg,
                                    const Tolerances& tol);

/// θ_k = π / 2^k for k = 1..count.
std::vector<double> default_angle_schedule(int count);
/// s_k = 4^{-k} for k = 1..count.
std::vector<double> default_s_schedule(int count);

}  // namespace posfact
