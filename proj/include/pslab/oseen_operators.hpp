#pragma once

// Radial finite-difference model of the Lamb-Oseen operator family at angular
// mode one:
//   A      = d_r^2 - 3/(4r^2) - r^2/16 + 1/2   (Dirichlet at 0 and R)
//   Lambda = M_rho - Z*Z
// on nodes r_j = j h, j = 1..n, with R = (n+1) h and uniform weights h.

#include <cstddef>

#include "pslab/linalg.hpp"
#include "pslab/spectral_operators.hpp"

namespace pslab {

struct RadialGrid {
  std::ptrdiff_t n = 0;
  double h = 0.0;
  double R = 0.0;
  RVec nodes;
};

/// n = round(R/h) - 1. Throws GridError for h > 0.05, R < 12 or h <= 0.
RadialGrid make_grid(double h, double R);

double rho(double r);
double rho_prime(double r);
/// g(r) = exp(-r^2/8).
double gauss_weight(double r);
/// Diagonal potential of A at r.
double oseen_potential(double r);

struct OseenOperatorSet {
  RadialGrid grid;
  TridiagonalOperator A_mat;  ///< modes hold node indices 1..n
  RVec lambda1;               ///< rho(r_j)
  RMat lambda2;               ///< -Z*Z on the grid, symmetric
  RVec kernel_vec;            ///< r^{3/2} g normalized

  RMat lambda_hat() const;
  /// A - i alpha Lambda as a dense complex matrix.
  CMat generator(double alpha) const;
  /// B_3 = M_{rho'} (diagonal).
  RVec b3_diag() const;
};

OseenOperatorSet assemble_oseen(const RadialGrid& grid);

/// P M P with P = I - v v^T.
RMat project_Y(const OseenOperatorSet& set, const RMat& M);
CMat project_Y(const OseenOperatorSet& set, const CMat& M);

/// Matrix of P M P in an orthonormal basis of Y (dimension n-1), realized by
/// the Householder reflector sending kernel_vec to e_1.
RMat restrict_Y(const OseenOperatorSet& set, const RMat& M);
CMat restrict_Y(const OseenOperatorSet& set, const CMat& M);
/// Orthonormal basis of Y as an n x (n-1) matrix.
RMat y_basis(const OseenOperatorSet& set);

/// W W* f by centered differences; used only as a consistency check of the
/// nonlocal part (-W W* Lambda_2 = I on smooth functions).
RVec ww_star_apply(const OseenOperatorSet& set, const RVec& f);

}  // namespace pslab
