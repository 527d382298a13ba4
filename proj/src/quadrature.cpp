#include "pslab/quadrature.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "pslab/errors.hpp"
#include "pslab/matrix_engine.hpp"

namespace pslab {

GaussRule gauss_legendre(int n) {
  if (n < 1) throw InvalidArgument("Gauss rule needs n >= 1");
  GaussRule g;
  g.nodes.resize(n);
  g.weights.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1.0;
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    g.nodes[i] = -x;
    g.nodes[n - 1 - i] = x;
    g.weights[i] = w;
    g.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) g.nodes[n / 2] = 0.0;
  return g;
}

Contour vertical_line(double x0, double half_height, int panels) {
  ContourPiece p;
  p.z = [x0](double s) { return cplx(x0, s); };
  p.dz = [](double) { return cplx(0.0, 1.0); };
  p.a = -half_height;
  p.b = half_height;
  p.panels = panels;
  return {p};
}

namespace {

CVec integrate_piece(const ResolventApply& resolve, double t, const ContourPiece& piece, int panels,
                     const GaussRule& rule, const CVec& g, const QuadratureOptions& opt) {
  CVec acc = CVec::Zero(g.size());
  const double h = (piece.b - piece.a) / panels;
  for (int p = 0; p < panels; ++p) {
    const double lo = piece.a + p * h;
    for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
      const double s = lo + 0.5 * h * (rule.nodes[q] + 1.0);
      const cplx z = piece.z(s);
      cplx w = std::exp(t * z) * piece.dz(s) * (0.5 * h * rule.weights[q]);
      if (opt.subtract_at) w *= std::pow(z - *opt.subtract_at, -opt.subtract_order);
      acc += w * resolve(z, g);
    }
  }
  return acc;
}

}  // namespace

QuadratureResult contour_quadrature(const ResolventApply& resolve, double t, const Contour& contour,
                                    const CVec& f, const QuadratureOptions& opt) {
  if (!(t > 0.0)) throw InvalidArgument("contour quadrature requires t > 0");
  const GaussRule rule = gauss_legendre(opt.order);
  CVec g = f;
  if (opt.subtract_at) {
    if (!opt.apply_M) throw InvalidArgument("resolvent subtraction needs apply_M");
    for (int k = 0; k < opt.subtract_order; ++k) g = opt.apply_M(g) - *opt.subtract_at * g;
  }
  const cplx scale = 1.0 / cplx(0.0, 2.0 * std::numbers::pi);
  auto total = [&](int mult) {
    CVec acc = CVec::Zero(f.size());
    for (const auto& piece : contour) acc += integrate_piece(resolve, t, piece, piece.panels * mult, rule, g, opt);
    return CVec(scale * acc);
  };
  int mult = 1;
  CVec prev = total(mult);
  for (int d = 1; d <= opt.max_doublings; ++d) {
    mult *= 2;
    CVec cur = total(mult);
    const double diff = (cur - prev).norm();
    if (diff <= opt.rel_tol * cur.norm() || cur.norm() == 0.0) {
      int panels = 0;
      for (const auto& piece : contour) panels += piece.panels * mult;
      return {cur, panels, d};
    }
    prev = std::move(cur);
  }
  throw NoConvergence("panel doubling stalled after " + std::to_string(opt.max_doublings) + " doublings");
}

QuadratureResult contour_quadrature(const TridiagonalOperator& M, double t, const Contour& contour,
                                    const CVec& f, QuadratureOptions opt) {
  ResolventApply resolve = [&M](cplx z, const CVec& b) { return TridiagLU::shifted(M, z).solve(b); };
  if (opt.subtract_at && !opt.apply_M) opt.apply_M = [&M](const CVec& x) { return M.apply(x); };
  return contour_quadrature(resolve, t, contour, f, opt);
}

QuadratureResult contour_quadrature(const RMat& M, double t, const Contour& contour, const CVec& f,
                                    QuadratureOptions opt) {
  const CMat Mc = M.cast<cplx>();
  ResolventApply resolve = [&Mc](cplx z, const CVec& b) {
    CMat T = -Mc;
    T.diagonal().array() += z;
    Eigen::PartialPivLU<CMat> lu(T);
    if (lu.matrixLU().diagonal().cwiseAbs().minCoeff() == 0.0) throw NearSingular("quadrature node on the spectrum");
    return CVec(lu.solve(b));
  };
  if (opt.subtract_at && !opt.apply_M) opt.apply_M = [&Mc](const CVec& x) { return CVec(Mc * x); };
  return contour_quadrature(resolve, t, contour, f, opt);
}

}  // namespace pslab
