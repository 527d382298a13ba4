#pragma once

// Dunford-integral quadrature: (1/2 pi i) \int_Gamma e^{t z} (z - M)^{-1} f dz
// with composite Gauss-Legendre panels on each piece of a parametrized path.

#include <functional>
#include <optional>
#include <vector>

#include "pslab/linalg.hpp"
#include "pslab/spectral_operators.hpp"

namespace pslab {

struct GaussRule {
  std::vector<double> nodes;    ///< on [-1, 1]
  std::vector<double> weights;
};

GaussRule gauss_legendre(int n);

/// One smooth piece z(s), s in [a, b], traversed from a to b.
struct ContourPiece {
  std::function<cplx(double)> z;
  std::function<cplx(double)> dz;
  double a = 0.0;
  double b = 1.0;
  int panels = 8;
};

using Contour = std::vector<ContourPiece>;

/// Upward vertical segment Re z = x0, Im z in [-half_height, half_height].
Contour vertical_line(double x0, double half_height, int panels = 16);

/// Solves (z - M) x = f.
using ResolventApply = std::function<CVec(cplx, const CVec&)>;

struct QuadratureOptions {
  int order = 16;
  double rel_tol = 1e-8;
  int max_doublings = 14;
  /// Resolvent subtraction: integrate e^{tz}(z-s)^{-k}(z-M)^{-1}(M-s)^k f, whose
  /// dropped terms integrate to zero when s lies right of the path. Needs
  /// `apply_M` (filled in by the matrix overloads) to compute M x.
  std::optional<double> subtract_at;
  int subtract_order = 2;
  std::function<CVec(const CVec&)> apply_M;
};

struct QuadratureResult {
  CVec value;
  int panels = 0;
  int doublings = 0;
};

QuadratureResult contour_quadrature(const ResolventApply& resolve, double t, const Contour& contour,
                                    const CVec& f, const QuadratureOptions& opt = {});
QuadratureResult contour_quadrature(const TridiagonalOperator& M, double t, const Contour& contour,
                                    const CVec& f, QuadratureOptions opt = {});
QuadratureResult contour_quadrature(const RMat& M, double t, const Contour& contour, const CVec& f,
                                    QuadratureOptions opt = {});

}  // namespace pslab
