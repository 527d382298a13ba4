#pragma once

// Fourier-basis assembly of L_{alpha,l} = A_l - i*alpha*l*Lambda_l on the torus.
//
// Modes are ordered k = -N..N ascending. The operator is exactly real and
// tridiagonal: with b_k = 1 - 1/(k^2 + l^2),
//   L[k][k]   = -(k^2 + l^2)
//   L[k][k-1] = -(alpha*l/2) * b_{k-1}
//   L[k][k+1] = +(alpha*l/2) * b_{k+1}
// Lambda_l itself is stored through its real form R = i*Lambda_l, so that
// L = A_l - alpha*l*R and Lambda_l = -i*R.

#include <cstddef>
#include <vector>

#include "pslab/linalg.hpp"

namespace pslab {

struct KolmogorovSpec {
  int l = 1;
  double alpha = 0.0;
  int N = 128;

  /// Throws InvalidArgument for l == 0 or N < min_modes.
  void validate(int min_modes = 1) const;
};

/// N = max(128, ceil(8 sqrt|alpha l|)).
int default_modes(double alpha, int l);

struct TridiagonalOperator {
  std::vector<int> modes;
  RVec diag;
  RVec sub;  ///< sub[i] = M(i+1, i)
  RVec sup;  ///< sup[i] = M(i, i+1)

  std::ptrdiff_t n() const { return diag.size(); }
  double entry(std::ptrdiff_t i, std::ptrdiff_t j) const;
  RMat dense() const;
  CVec apply(const CVec& x) const;
  RVec apply(const RVec& x) const;
  /// Position of mode k, or -1.
  std::ptrdiff_t index_of(int k) const;
};

struct ProjectedOperator {
  TridiagonalOperator base;
  std::vector<int> removed_modes;
  /// Rows/columns of `base` kept on Y_l, in order.
  std::vector<std::ptrdiff_t> kept;
  /// Matrix of Q_l L Q_l acting on Y_l.
  TridiagonalOperator reduced;

  std::ptrdiff_t dim() const { return reduced.n(); }
};

/// b_k = 1 - 1/(k^2 + l^2) for k = -N..N.
RVec b2_multipliers(const KolmogorovSpec& spec);

TridiagonalOperator assemble_kolmogorov(const KolmogorovSpec& spec);

/// Real form R = i*Lambda_l (zero diagonal).
TridiagonalOperator assemble_lambda_hat(const KolmogorovSpec& spec);

/// Diagonal of A_l, i.e. -(k^2 + l^2).
RVec laplacian_diag(const KolmogorovSpec& spec);

/// Removes mode 0 when |l| == 1.
ProjectedOperator project(const TridiagonalOperator& op, int l);

/// Fourier matrix of M_{sin y}(d_y - l)A_l^{-1} + M_{cos y}B_{2,l}.
CMat assemble_b3(const KolmogorovSpec& spec);

/// Dense complex matrix of Lambda_l = -i R.
CMat lambda_hat_dense(const KolmogorovSpec& spec);

/// Columns of the identity spanning Y_l inside the full mode space.
RMat y_basis(const KolmogorovSpec& spec);

}  // namespace pslab
