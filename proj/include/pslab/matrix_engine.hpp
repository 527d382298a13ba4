#pragma once

// Shared numerical kernels: shifted-system singular values, eigenvalues,
// propagators and their norms.

#include <cstdint>
#include <optional>
#include <vector>

#include "pslab/linalg.hpp"
#include "pslab/spectral_operators.hpp"

namespace pslab {

/// LU factorization with partial pivoting of a complex tridiagonal matrix,
/// stored in the LAPACK gttrf layout.
class TridiagLU {
 public:
  TridiagLU(CVec sub, CVec diag, CVec sup);
  /// Factor (zeta I - T).
  static TridiagLU shifted(const TridiagonalOperator& T, cplx zeta);

  CVec solve(const CVec& b) const;          ///< M x = b
  CVec solve_adjoint(const CVec& b) const;  ///< M^H x = b
  CMat solve(const CMat& B) const;
  CMat solve_adjoint(const CMat& B) const;
  CVec apply(const CVec& x) const;  ///< M x with the unfactored matrix
  double min_pivot() const { return min_pivot_; }
  double max_abs() const { return max_abs_; }
  std::ptrdiff_t n() const { return d_.size(); }

 private:
  CVec a_sub_, a_diag_, a_sup_;  // original matrix
  CVec dl_, d_, du_, du2_;
  std::vector<std::ptrdiff_t> ipiv_;
  double min_pivot_ = 0.0;
  double max_abs_ = 0.0;
};

/// LU factorization with partial pivoting of (zeta I - H) for upper
/// Hessenberg H. O(n^2) per shift; entries below the subdiagonal are ignored.
class HessenbergLU {
 public:
  static HessenbergLU shifted(const CMat& H, cplx zeta);

  CMat solve(const CMat& B) const;
  CMat solve_adjoint(const CMat& B) const;
  CMat apply(const CMat& X) const;  ///< (zeta I - H) X
  double min_pivot() const { return min_pivot_; }
  double max_abs() const { return max_abs_; }
  std::ptrdiff_t n() const { return U_.rows(); }

 private:
  CMat A_;  // zeta I - H, Hessenberg part only
  CMat U_;
  CVec mult_;
  std::vector<bool> swap_;
  double min_pivot_ = 0.0;
  double max_abs_ = 0.0;
};

struct SigmaOptions {
  /// Relative Ritz residual on (T^H T)^{-1}.
  double tol = 1e-10;
  int krylov = 40;
  int max_restarts = 40;
  std::uint64_t seed = 0x5eed;
};

struct SigmaResult {
  double sigma = 0.0;
  int iterations = 0;
  CVec right_vector;
};

/// sigma_min(zeta I - T) for tridiagonal T by restarted Lanczos on
/// ((zeta - T)^H (zeta - T))^{-1}. O(n) solves per step.
SigmaResult smallest_singular_value(const TridiagonalOperator& T, cplx zeta, const SigmaOptions& opt = {});
/// Dense variant (complex LU once per shift, then the same iteration).
SigmaResult smallest_singular_value(const CMat& base, cplx zeta, const SigmaOptions& opt = {});
SigmaResult smallest_singular_value(const RMat& base, cplx zeta, const SigmaOptions& opt = {});
/// sigma_min(zeta I - H) for upper Hessenberg H, O(n^2) per iteration. With
/// H = U^H M U from a unitary reduction this equals sigma_min(zeta I - M).
SigmaResult smallest_singular_value_hessenberg(const CMat& H, cplx zeta, const SigmaOptions& opt = {});
/// Oracle path: full singular value decomposition.
double smallest_singular_value_svd(const CMat& base, cplx zeta);

struct EigResult {
  CVec eigenvalues;
  std::optional<CMat> vectors;
};

struct EigOptions {
  std::ptrdiff_t dense_cap = 4096;
  bool vectors = false;
};

EigResult eigenvalues(const RMat& M, const EigOptions& opt = {});
/// Splits T into decoupled blocks (zero couplings) before solving each.
EigResult eigenvalues(const TridiagonalOperator& T, const EigOptions& opt = {});

/// exp(tM). Scaling and squaring with Pade approximants.
RMat propagator(const RMat& M, double t);
CMat propagator(const CMat& M, double t);

/// Krylov approximation of exp(tM) v (Arnoldi with substeps).
RVec expv(const RMat& M, double t, const RVec& v, double tol = 1e-12);

struct NormOptions {
  std::ptrdiff_t dense_cap = 4096;
  double tol = 1e-13;
  int max_iter = 300;
  int block = 4;
  std::uint64_t seed = 0x7ab1e;
};

/// Largest singular value by subspace iteration on E^T E with a full SVD
/// fallback.
double largest_singular_value(const RMat& E, const NormOptions& opt = {});
double largest_singular_value(const CMat& E, const NormOptions& opt = {});

/// || B^T exp(tM) B || for an orthonormal column basis B (identity if absent).
double propagator_norm(const RMat& M, double t, const std::optional<RMat>& restrict = std::nullopt,
                       const NormOptions& opt = {});

}  // namespace pslab
