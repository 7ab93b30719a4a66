#pragma once

#include <Eigen/Dense>

#include <complex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace posfact {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Global numeric policy. All cutoffs are relative to the scale of the
/// operand except tol_eq, which bounds absolute residuals after scaling.
struct Tolerances {
  double tol_rank = 1e-10;     // relative singular-value cutoff
  double tol_psd = 1e-10;      // relative negative-eigenvalue floor
  double tol_eq = 1e-8;        // residual tolerance
  double tol_cluster = 1e-8;   // relative eigenvalue-clustering width
  double cond_max = 1e8;       // diagonalizability condition threshold
};

// Principal-angle tolerance for range/kernel matching; angles degrade as
// the square root of the residual tolerance, hence the fixed value.
inline constexpr double kTolAngle = 1e-7;

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NotSquareError : Error {
  using Error::Error;
};
struct DimensionMismatchError : Error {
  using Error::Error;
};
struct NotFiniteError : Error {
  using Error::Error;
};
struct NotHermitianError : Error {
  using Error::Error;
};
struct NotPsdError : Error {
  using Error::Error;
};
struct NotInvertibleError : Error {
  using Error::Error;
};
struct RangeNotContainedError : Error {
  using Error::Error;
};
struct RangeMismatchError : Error {
  using Error::Error;
};
struct InfeasibleError : Error {
  using Error::Error;
};
struct InvalidPerturbationError : Error {
  using Error::Error;
};
struct NotInClassError : Error {
  using Error::Error;
};
struct DomainError : Error {
  using Error::Error;
};
struct UnknownNameError : Error {
  using Error::Error;
};
struct InvalidParamsError : Error {
  using Error::Error;
};
struct ParseError : Error {
  using Error::Error;
};
// A post-condition guaranteed by the theory failed numerically.
struct CertificateError : Error {
  using Error::Error;
};

/// Subspace of C^n given by an orthonormal column basis (n x k, 0 <= k <= n).
struct Subspace {
  Index ambient_dim = 0;
  CMatrix basis;  // ambient_dim x k, orthonormal columns

  Index dim() const { return basis.cols(); }

  static Subspace zero(Index n) {
    Subspace s;
    s.ambient_dim = n;
    s.basis = CMatrix::Zero(n, 0);
    return s;
  }
  static Subspace full(Index n) {
    Subspace s;
    s.ambient_dim = n;
    s.basis = CMatrix::Identity(n, n);
    return s;
  }
};

struct EigenCluster {
  Complex eigenvalue;    // cluster representative (mean)
  int algebraic_mult = 0;
  int geometric_mult = 0;
};

struct SpectrumReport {
  std::vector<EigenCluster> clusters;  // sorted ascending by (Re, Im)
  double eigvec_cond = 1.0;
  bool diagonalizable = false;
  bool spectrum_nonneg = false;
  // A cluster kernel came out larger than its algebraic multiplicity, which
  // cannot happen mathematically: the rank cutoffs have run out of
  // resolution and the verdict is perturbation-sensitive.
  bool kernel_overcount = false;
};

struct Factorization {
  CMatrix A;
  CMatrix B;
  double residual = 0.0;      // ||A*B - T||_F
  bool optimal = false;       // range_match and kernel_match <= kTolAngle
  double range_match = 0.0;   // largest principal angle, ran A vs ran T
  double kernel_match = 0.0;  // largest principal angle, ker B vs ker T
};

enum class Subclass { ProjProj, PosProj, General, Outside };

enum class Confidence { Firm, NearBoundary };

struct MembershipVerdict {
  bool in_l2p = false;
  Subclass subclass = Subclass::Outside;
  std::optional<Factorization> witness;
  std::string reason;
  Confidence confidence = Confidence::Firm;
  SpectrumReport spectrum;
};

struct SchurPair {
  CMatrix complement;        // the part supported on S-perp
  CMatrix compression;       // B - complement
  double contraction_norm = 0.0;
};

enum class PairOrder { Less, Greater, Equal, Incomparable };

const char* to_string(Subclass s);
const char* to_string(Confidence c);
const char* to_string(PairOrder o);

/// Throws NotFiniteError if M contains NaN or Inf entries.
void ensure_finite(const CMatrix& M, const std::string& what);
/// Throws NotSquareError unless M is square with at least one row.
void ensure_square(const CMatrix& M, const std::string& what);

}  // namespace posfact
