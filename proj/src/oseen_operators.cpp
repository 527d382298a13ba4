#include "pslab/oseen_operators.hpp"

#include <cmath>
#include <string>

#include "pslab/errors.hpp"

namespace pslab {

RadialGrid make_grid(double h, double R) {
  if (!(h > 0.0) || h > 0.05) throw GridError("grid spacing h = " + std::to_string(h) + " outside (0, 0.05]");
  if (!(R >= 12.0)) throw GridError("cutoff R = " + std::to_string(R) + " below 12");
  RadialGrid g;
  g.h = h;
  g.n = static_cast<std::ptrdiff_t>(std::llround(R / h)) - 1;
  g.R = (g.n + 1) * h;
  g.nodes.resize(g.n);
  for (std::ptrdiff_t j = 0; j < g.n; ++j) g.nodes(j) = (j + 1) * h;
  return g;
}

double rho(double r) {
  const double x = 0.25 * r * r;
  if (r * r < 1e-4) return 1.0 - x / 2.0 + x * x / 6.0 - x * x * x / 24.0;
  return -std::expm1(-x) / x;
}

double rho_prime(double r) {
  const double x = 0.25 * r * r;
  double drdx;
  if (x < 0.1) {
    // d/dx sum_{n>=0} (-x)^n/(n+1)!
    drdx = 0.0;
    double xp = 1.0;
    double fact = 1.0;
    for (int n = 1; n <= 14; ++n) {
      fact *= (n + 1);
      drdx += (n % 2 ? -1.0 : 1.0) * n * xp / fact;
      xp *= x;
    }
  } else {
    const double e = std::exp(-x);
    drdx = (x * e + std::expm1(-x)) / (x * x);
  }
  return drdx * 0.5 * r;
}

double gauss_weight(double r) { return std::exp(-r * r / 8.0); }

double oseen_potential(double r) { return -3.0 / (4.0 * r * r) - r * r / 16.0 + 0.5; }

OseenOperatorSet assemble_oseen(const RadialGrid& grid) {
  if (!(grid.h > 0.0) || grid.h > 0.05) throw GridError("grid too coarse");
  const auto n = grid.n;
  const double h = grid.h;
  OseenOperatorSet s;
  s.grid = grid;
  auto& A = s.A_mat;
  A.modes.resize(n);
  A.diag.resize(n);
  A.sub = RVec::Constant(n - 1, 1.0 / (h * h));
  A.sup = A.sub;
  s.lambda1.resize(n);
  RVec g(n), sq(n);
  for (std::ptrdiff_t j = 0; j < n; ++j) {
    const double r = grid.nodes(j);
    A.modes[j] = static_cast<int>(j + 1);
    A.diag(j) = -2.0 / (h * h) + oseen_potential(r);
    s.lambda1(j) = rho(r);
    g(j) = gauss_weight(r);
    sq(j) = std::sqrt(r);
  }
  // Kernel min(r/s, s/r) (rs)^{1/2} = r_<^{3/2} r_>^{-1/2}.
  s.lambda2.resize(n, n);
  for (std::ptrdiff_t j = 0; j < n; ++j) {
    for (std::ptrdiff_t k = 0; k <= j; ++k) {
      const double rk = grid.nodes(k);
      const double kern = rk * sq(k) / sq(j);  // rk <= rj
      const double v = -0.5 * h * g(j) * g(k) * kern;
      s.lambda2(j, k) = v;
      s.lambda2(k, j) = v;
    }
  }
  // The kernel has a derivative jump of 2 across s = r; the Euler-Maclaurin
  // correction for that kink is diagonal, so symmetry is kept.
  for (std::ptrdiff_t j = 0; j < n; ++j) s.lambda2(j, j) += h * h * g(j) * g(j) / 12.0;

  s.kernel_vec.resize(n);
  for (std::ptrdiff_t j = 0; j < n; ++j) {
    const double r = grid.nodes(j);
    s.kernel_vec(j) = r * sq(j) * g(j);
  }
  s.kernel_vec.normalize();
  return s;
}

RMat OseenOperatorSet::lambda_hat() const {
  RMat L = lambda2;
  L.diagonal() += lambda1;
  return L;
}

CMat OseenOperatorSet::generator(double alpha) const {
  CMat L = (cplx(0.0, -alpha) * lambda_hat().cast<cplx>()).eval();
  const auto n = grid.n;
  for (std::ptrdiff_t j = 0; j < n; ++j) {
    L(j, j) += A_mat.diag(j);
    if (j + 1 < n) {
      L(j + 1, j) += A_mat.sub(j);
      L(j, j + 1) += A_mat.sup(j);
    }
  }
  return L;
}

RVec OseenOperatorSet::b3_diag() const {
  RVec d(grid.n);
  for (std::ptrdiff_t j = 0; j < grid.n; ++j) d(j) = rho_prime(grid.nodes(j));
  return d;
}

namespace {

template <class Mat>
Mat project_impl(const RVec& v, const Mat& M) {
  using S = typename Mat::Scalar;
  const Eigen::Matrix<S, Eigen::Dynamic, 1> vs = v.cast<S>();
  const Eigen::Matrix<S, 1, Eigen::Dynamic> vtM = vs.transpose() * M;
  const Eigen::Matrix<S, Eigen::Dynamic, 1> Mv = M * vs;
  const S vMv = vtM.dot(vs.conjugate());
  Mat out = M;
  out.noalias() -= vs * vtM;
  out.noalias() -= Mv * vs.transpose();
  out.noalias() += (vMv * vs) * vs.transpose();
  return out;
}

// H = I - 2 w w^T / (w^T w) with H v = -sign(v_0) e_1.
RVec householder_vector(const RVec& v) {
  RVec w = v;
  w(0) += (v(0) >= 0 ? 1.0 : -1.0) * v.norm();
  return w;
}

template <class Mat>
Mat restrict_impl(const RVec& v, const Mat& M) {
  using S = typename Mat::Scalar;
  const RVec w = householder_vector(v);
  const double beta = 2.0 / w.squaredNorm();
  const Eigen::Matrix<S, Eigen::Dynamic, 1> ws = w.cast<S>();
  const Eigen::Matrix<S, 1, Eigen::Dynamic> wtM = ws.transpose() * M;
  const Eigen::Matrix<S, Eigen::Dynamic, 1> Mw = M * ws;
  const S wMw = wtM.dot(ws.conjugate());
  Mat out = M;
  out.noalias() -= (beta * ws) * wtM;
  out.noalias() -= (beta * Mw) * ws.transpose();
  out.noalias() += (beta * beta * wMw * ws) * ws.transpose();
  const auto n = M.rows();
  return out.bottomRightCorner(n - 1, n - 1);
}

}  // namespace

RMat project_Y(const OseenOperatorSet& set, const RMat& M) { return project_impl(set.kernel_vec, M); }
CMat project_Y(const OseenOperatorSet& set, const CMat& M) { return project_impl(set.kernel_vec, M); }
RMat restrict_Y(const OseenOperatorSet& set, const RMat& M) { return restrict_impl(set.kernel_vec, M); }
CMat restrict_Y(const OseenOperatorSet& set, const CMat& M) { return restrict_impl(set.kernel_vec, M); }

RMat y_basis(const OseenOperatorSet& set) {
  const RVec w = householder_vector(set.kernel_vec);
  const double beta = 2.0 / w.squaredNorm();
  const auto n = w.size();
  RMat H = RMat::Identity(n, n) - beta * w * w.transpose();
  return H.rightCols(n - 1);
}

RVec ww_star_apply(const OseenOperatorSet& set, const RVec& f) {
  const auto n = set.grid.n;
  const double h = set.grid.h;
  RVec out(n);
  for (std::ptrdiff_t j = 0; j < n; ++j) {
    const double r = set.grid.nodes(j);
    const double fm = j > 0 ? f(j - 1) : 0.0;
    const double fp = j + 1 < n ? f(j + 1) : 0.0;
    const double d2 = (fp - 2.0 * f(j) + fm) / (h * h);
    const double d1 = (fp - fm) / (2.0 * h);
    const double g = gauss_weight(r);
    out(j) = -(d2 + 0.5 * r * d1 + (r * r / 16.0 + 0.25 - 3.0 / (4.0 * r * r)) * f(j)) / (g * g);
  }
  return out;
}

}  // namespace pslab
