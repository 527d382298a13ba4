#include "pslab/coercivity_lab.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "pslab/errors.hpp"
#include "pslab/matrix_engine.hpp"
#include "pslab/parallel.hpp"

namespace pslab {

void GapFunctions::validate() const {
  if (!(kappa > 0.0 && kappa < 1.0)) throw InvalidArgument("kappa must lie in (0, 1)");
  if (!(m0 >= 1.0)) throw InvalidArgument("m0 must be >= 1");
}

namespace {

double h_kolmogorov(int j, double kappa, double m, double mu) {
  const double a = std::abs(mu);
  const double w = j == 1 ? kappa / m : kappa / (m * m);
  if (a > 1.0 + w) return 0.0;
  if (a > 1.0 - w) return j == 1 ? 1.0 / std::sqrt(m) : 1.0 / (m * m);
  switch (j) {
    case 1: return 1.0 / (m * std::sqrt(1.0 - a));
    case 2: return std::sqrt(1.0 - a) / m;
    default: return 1.0 / (m * m * m * std::sqrt(1.0 - a));
  }
}

double h1_sq_oseen(double kappa, double m, double mu) {
  if (mu > 1.0 + kappa / m) return 0.0;
  if (mu > 1.0 - kappa / m) return 1.0 / m;
  if (mu > 0.5) return 1.0 / (m * m * (1.0 - mu));
  if (mu > 1.0 / std::sqrt(m)) return 1.0 / (m * m * mu * mu * mu);
  if (mu > 1.0 / (10.0 * m)) return mu;
  if (mu >= -1.0 / (10.0 * m)) return 1.0 / m;
  return 0.0;
}

double h2_sq_oseen(double kappa, double m, double mu) {
  const double m2 = m * m;
  if (mu > 1.0 + kappa / m2) return 0.0;
  if (mu > 1.0 - kappa / m2) return 1.0 / (m2 * m2);
  if (mu > 0.5) return (1.0 - mu) / m2;
  if (mu > 0.0) return mu * mu * mu / m2;
  return 0.0;
}

double h_raw(int j, const GapFunctions& gf, double m, double mu) {
  if (gf.flavor == Model::kolmogorov) return h_kolmogorov(j, gf.kappa, m, mu);
  if (j == 1) return std::sqrt(h1_sq_oseen(gf.kappa, m, mu));
  if (j == 2) return std::sqrt(h2_sq_oseen(gf.kappa, m, mu));
  throw FlavorMismatch("h_3 is defined only for the Kolmogorov flavor");
}

}  // namespace

double h(int j, const GapFunctions& gf, double m, double mu) {
  gf.validate();
  if (j < 1 || j > 3) throw InvalidArgument("gap function index must be 1, 2 or 3");
  if (j == 3 && gf.flavor != Model::kolmogorov) throw FlavorMismatch("h_3 is defined only for the Kolmogorov flavor");
  if (!(m >= gf.m0)) throw InvalidArgument("m must be >= m0");
  return h_raw(j, gf, m, mu);
}

double f_objective(const GapFunctions& gf, double alpha_tilde, double mu, double m1, double m2) {
  const double a = std::abs(alpha_tilde);
  const double h1 = h_raw(1, gf, m1, mu);
  const double h2 = h_raw(2, gf, m2, mu);
  return m1 / a + m1 * m1 * m2 * m2 / (a * a) + m1 * m1 * h2 / a + h1 * h1;
}

FEvaluation f_closed_form(const GapFunctions& gf, double alpha_tilde, double mu) {
  gf.validate();
  const double a = std::abs(alpha_tilde);
  if (!(a >= kAlphaMin)) throw BelowAlphaMin("|alpha| below the closed-form minimum of 1e2");
  const double k = gf.kappa;
  FEvaluation e;
  if (gf.flavor == Model::kolmogorov) {
    const double x = std::abs(mu);
    const double t = std::pow(k, 0.75) / std::sqrt(a);
    if (x > 1.0 + t) {
      e.case_id = 1;
      e.m1 = 2.0 * k / (x - 1.0);
      e.m2 = std::sqrt(e.m1);
    } else if (x > 1.0 - t) {
      e.case_id = 2;
      e.m1 = std::sqrt(k * a);
      e.m2 = std::sqrt(e.m1);
    } else {
      e.case_id = 3;
      e.m1 = std::cbrt(a / (1.0 - x));
      e.m2 = std::cbrt(a * std::sqrt(1.0 - x));
    }
  } else {
    const double d = k / std::sqrt(a);
    const double s = 1.0 / std::sqrt(a);
    const double c = 1.0 / std::cbrt(a);
    if (mu > 1.0 + d) {
      e.case_id = 1;
      e.m1 = 2.0 * k / (mu - 1.0);
      e.m2 = std::sqrt(e.m1);
    } else if (mu > 1.0 - d) {
      e.case_id = 2;
      e.m1 = std::sqrt(a);
      e.m2 = std::sqrt(e.m1);
    } else if (mu > 0.5) {
      e.case_id = 3;
      e.m1 = std::cbrt(a / (1.0 - mu));
      e.m2 = std::cbrt(a * std::sqrt(1.0 - mu) / k);
    } else if (mu > c) {
      e.case_id = 4;
      e.m1 = std::cbrt(a) / mu;
      e.m2 = std::cbrt(a) * std::sqrt(mu);
    } else if (mu > s) {
      e.case_id = 5;
      e.m1 = a * mu;
      e.m2 = std::cbrt(a) * std::sqrt(mu);
    } else if (mu > -s) {
      e.case_id = 6;
      e.m1 = std::sqrt(a) / 10.0;
      e.m2 = std::cbrt(a) * std::sqrt(std::abs(mu));
    } else {
      e.case_id = 7;
      e.m1 = 1.0 / std::abs(mu);
      e.m2 = 100.0;
    }
  }
  e.admissible = e.m1 >= gf.m0 && e.m2 >= gf.m0;
  e.value = f_objective(gf, alpha_tilde, mu, e.m1, e.m2);
  return e;
}

namespace {

// Minimizes f over a sampled grid, then densely resamples the two cells around
// the best node a few times. Returns {argmin, min}.
std::pair<double, double> grid_min(const std::vector<double>& grid, const std::function<double(double)>& f) {
  std::size_t best = 0;
  double fb = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double v = f(grid[i]);
    if (v < fb) {
      fb = v;
      best = i;
    }
  }
  double x = grid[best];
  double lo = grid[best == 0 ? 0 : best - 1];
  double hi = grid[std::min(best + 1, grid.size() - 1)];
  for (int round = 0; round < 3; ++round) {
    const int n = 64;
    const double llo = std::log(lo), lhi = std::log(hi);
    double nb = x;
    for (int i = 0; i <= n; ++i) {
      const double m = std::exp(llo + (lhi - llo) * i / n);
      const double v = f(m);
      if (v < fb) {
        fb = v;
        nb = m;
      }
    }
    const double step = (lhi - llo) / n;
    x = nb;
    lo = std::max(std::exp(llo), std::exp(std::log(x) - step));
    hi = std::min(std::exp(lhi), std::exp(std::log(x) + step));
  }
  return {x, fb};
}

}  // namespace

double f_grid_inf(const GapFunctions& gf, double alpha_tilde, double mu, int grid_decades) {
  gf.validate();
  if (grid_decades < 4) throw InvalidArgument("grid_decades must be >= 4");
  const double a = std::abs(alpha_tilde);
  const double top = std::max(a * a, gf.m0 * std::pow(10.0, grid_decades));
  const int pts = static_cast<int>(std::ceil(40.0 * std::log10(top / gf.m0)));
  std::vector<double> grid(pts + 1);
  for (int i = 0; i <= pts; ++i) grid[i] = gf.m0 * std::pow(top / gf.m0, static_cast<double>(i) / pts);

  // The objective separates as m1/a + h1(m1)^2 + m1^2 g(m2) with
  // g(m2) = m2^2/a^2 + h2(m2)/a, so the 2-D infimum is two nested 1-D ones.
  auto g = [&](double m2) { return m2 * m2 / (a * a) + h_raw(2, gf, m2, mu) / a; };
  const double gstar = grid_min(grid, g).second;
  auto f1 = [&](double m1) {
    const double h1 = h_raw(1, gf, m1, mu);
    return m1 / a + m1 * m1 * gstar + h1 * h1;
  };
  double best = grid_min(grid, f1).second;
  if (a >= kAlphaMin) best = std::min(best, f_closed_form(gf, alpha_tilde, mu).value);
  return best;
}

// ---------------------------------------------------------------------------
// coercivity pencils

CoercivityContext coercivity_context(const KolmogorovSpec& spec) {
  spec.validate();
  CoercivityContext c;
  c.lambda_hat = lambda_hat_dense(spec);
  c.neg_A = (-laplacian_diag(spec)).cast<cplx>().asDiagonal();
  c.Y = y_basis(spec).cast<cplx>();
  c.Q = c.Y * c.Y.adjoint();
  return c;
}

CoercivityContext coercivity_context(const OseenOperatorSet& set) {
  CoercivityContext c;
  c.lambda_hat = set.lambda_hat().cast<cplx>();
  c.neg_A = (-set.A_mat.dense()).cast<cplx>();
  c.Y = y_basis(set).cast<cplx>();
  c.Q = c.Y * c.Y.adjoint();
  return c;
}

PencilResult minimal_constant(const CoercivityContext& ctx, double mu, double m, double h1) {
  const std::ptrdiff_t n = ctx.lambda_hat.rows();
  CMat T = mu * CMat::Identity(n, n) - ctx.lambda_hat;
  if (std::abs(mu) < 0.5) T = ctx.Q * T;
  const CMat TY = T * ctx.Y;
  CMat K = (m * m) * (TY.adjoint() * TY) + (h1 * h1) * (ctx.Y.adjoint() * ctx.neg_A * ctx.Y);
  K = 0.5 * (K + K.adjoint()).eval();
  Eigen::SelfAdjointEigenSolver<CMat> es(K, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NoConvergence("pencil eigensolver failed");
  PencilResult r;
  r.lambda_min = es.eigenvalues().minCoeff();
  r.c_emp = r.lambda_min > 0.0 ? 1.0 / r.lambda_min : std::numeric_limits<double>::infinity();
  return r;
}

CoercivityReport coercivity_report(const CoercivityContext& ctx, const GapFunctions& gf,
                                   const std::vector<double>& mus, double m) {
  CoercivityReport rep;
  rep.m = m;
  rep.mu = mus;
  for (double mu : mus) rep.h1.push_back(h(1, gf, m, mu));
  const auto res = parallel_map(mus.size(), [&](std::size_t i) { return minimal_constant(ctx, mus[i], m, rep.h1[i]); });
  for (const auto& r : res) {
    rep.lambda_min.push_back(r.lambda_min);
    rep.c_emp.push_back(r.c_emp);
  }
  return rep;
}

// ---------------------------------------------------------------------------
// assumption audit

namespace {

// Maximizes f over [lo, hi] (log scale if log_scale): uniform scan then golden
// refinement inside the bracket of the best sample.
double scan_max(const std::function<double(double)>& f, double lo, double hi, int pts, bool log_scale) {
  auto to_x = [&](double s) { return log_scale ? std::exp(s) : s; };
  const double slo = log_scale ? std::log(lo) : lo;
  const double shi = log_scale ? std::log(hi) : hi;
  std::vector<double> s(pts), v(pts);
  for (int i = 0; i < pts; ++i) s[i] = slo + (shi - slo) * i / (pts - 1);
  const auto vals = parallel_map(s.size(), [&](std::size_t i) { return f(to_x(s[i])); });
  const int b = static_cast<int>(std::max_element(vals.begin(), vals.end()) - vals.begin());
  double best = vals[b];
  double a = s[std::max(0, b - 1)], c = s[std::min(pts - 1, b + 1)];
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = c - gr * (c - a), x2 = a + gr * (c - a);
  double f1 = f(to_x(x1)), f2 = f(to_x(x2));
  for (int it = 0; it < 30 && (c - a) > 1e-6 * (1.0 + std::abs(a)); ++it) {
    if (f1 > f2) {
      c = x2;
      x2 = x1;
      f2 = f1;
      x1 = c - gr * (c - a);
      f1 = f(to_x(x1));
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + gr * (c - a);
      f2 = f(to_x(x2));
    }
  }
  return std::max({best, f1, f2});
}

// lambda_max of the Hermitian pencil (H, P) given the Cholesky factor of P.
double pencil_max(const CMat& H, const Eigen::LLT<CMat>& P) {
  const CMat& L = P.matrixL();
  CMat X = L.triangularView<Eigen::Lower>().solve(H);
  X = L.triangularView<Eigen::Lower>().solve(X.adjoint().eval()).adjoint().eval();
  X = 0.5 * (X + X.adjoint()).eval();
  Eigen::SelfAdjointEigenSolver<CMat> es(X, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NoConvergence("pencil eigensolver failed");
  return es.eigenvalues().maxCoeff();
}

// Spectral radius of the antisymmetric L^{-1} S L^{-T} by power iteration on
// its square; only applications are needed.
double antisym_pencil_norm(const RMat& S, const Eigen::LLT<RMat>& P, std::uint64_t seed) {
  const std::ptrdiff_t n = S.rows();
  const auto L = P.matrixL();
  const auto U = P.matrixU();
  auto apply = [&](const RVec& x) -> RVec {
    RVec y = U.solve(x);
    y = S * y;
    return L.solve(y);
  };
  RVec x = RVec::Zero(n);
  std::uint64_t st = seed;
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    st = st * 6364136223846793005ULL + 1442695040888963407ULL;
    x(i) = static_cast<double>(st >> 11) / 9007199254740992.0 - 0.5;
  }
  x.normalize();
  double est = 0.0;
  for (int it = 0; it < 2000; ++it) {
    RVec y = apply(x);
    const double now = y.norm();
    RVec z = -apply(y);
    x = z / z.norm();
    if (it > 5 && std::abs(now - est) <= 1e-11 * now) {
      est = now;
      break;
    }
    est = now;
  }
  return est;
}

}  // namespace

AssumptionAudit audit_assumptions(const KolmogorovSpec& spec) {
  spec.validate();
  AssumptionAudit out;
  out.model = Model::kolmogorov;
  out.l = spec.l;
  const RMat Yr = y_basis(spec);
  const CMat Y = Yr.cast<cplx>();
  out.dim = Y.cols();
  const RVec negA = -laplacian_diag(spec);
  const RVec dY = Yr.transpose() * negA;
  out.c0 = dY.minCoeff();
  const RVec b = b2_multipliers(spec);
  out.b2_coercivity = (Yr.transpose() * b).minCoeff();

  const CMat Lam = lambda_hat_dense(spec);
  const CMat A = (-negA).cast<cplx>().asDiagonal();
  const CMat G = (A * Lam - Lam.adjoint() * A) / cplx(0.0, 2.0);
  const CMat LY = Y.adjoint() * Lam * Y;
  const CMat GY = Y.adjoint() * G * Y;
  const CMat P = dY.cast<cplx>().asDiagonal();
  const Eigen::LLT<CMat> Pf(P);

  double lb = 0.0;
  for (double s : {1.0, -1.0}) {
    auto f = [&](double th) {
      const cplx e = std::polar(1.0, th);
      const CMat H = 0.5 * (e * LY + std::conj(e) * LY.adjoint()) + s * GY;
      return pencil_max(H, Pf);
    };
    lb = std::max(lb, scan_max(f, 0.0, 2.0 * M_PI, 49, false));
  }
  out.lambda_bound = lb;

  const CMat B3Y = assemble_b3(spec) * Y;
  const CMat gram = B3Y.adjoint() * B3Y;
  auto fb = [&](double t) {
    const Eigen::LLT<CMat> Ft(t * P + gram / t);
    return 2.0 * std::max(pencil_max(GY, Ft), pencil_max(-GY, Ft));
  };
  out.b3_bound = scan_max(fb, 1e-4, 1e4, 33, true);

  if (std::abs(spec.l) == 1) {
    const TridiagonalOperator R = assemble_lambda_hat(spec);
    CVec w = CVec::Zero(R.n());
    const std::ptrdiff_t i0 = R.index_of(0);
    w(i0) = b(i0);
    out.ker_ran = (Y.adjoint() * (Lam.adjoint() * w)).norm();
  }
  return out;
}

AssumptionAudit audit_assumptions(const OseenOperatorSet& set) {
  AssumptionAudit out;
  out.model = Model::oseen;
  out.l = 1;
  const RMat Y = y_basis(set);
  out.dim = Y.cols();
  const RMat A = set.A_mat.dense();
  const RMat Lam = set.lambda_hat();
  const RMat AY = Y.transpose() * (-A) * Y;
  const RMat LY = Y.transpose() * Lam * Y;
  const RMat S = 0.5 * (A * Lam - Lam * A);
  const RMat SY = Y.transpose() * S * Y;
  {
    Eigen::SelfAdjointEigenSolver<RMat> es(0.5 * (AY + AY.transpose()), Eigen::EigenvaluesOnly);
    out.c0 = es.eigenvalues().minCoeff();
  }
  out.b2_coercivity = 1.0;

  // G = -iS; conjugation maps the s1 = -1 combination onto s1 = +1.
  const CMat PA = AY.cast<cplx>();
  const Eigen::LLT<CMat> Pf(0.5 * (PA + PA.adjoint()));
  const CMat GY = cplx(0.0, -1.0) * SY.cast<cplx>();
  double lb = 0.0;
  for (double s0 : {1.0, -1.0}) lb = std::max(lb, pencil_max(s0 * LY.cast<cplx>() + GY, Pf));
  out.lambda_bound = lb;

  const RVec rp = set.b3_diag();
  const RMat gram = Y.transpose() * rp.cwiseAbs2().asDiagonal() * Y;
  auto fb = [&](double t) {
    const Eigen::LLT<RMat> Ft(t * AY + gram / t);
    if (Ft.info() != Eigen::Success) throw NoConvergence("pencil not positive definite");
    return 2.0 * antisym_pencil_norm(SY, Ft, 0x5eed);
  };
  out.b3_bound = scan_max(fb, 1e-3, 1e3, 13, true);

  out.ker_ran = (Y.transpose() * (Lam * set.kernel_vec)).norm();
  return out;
}

}  // namespace pslab
