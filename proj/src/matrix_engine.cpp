#include "pslab/matrix_engine.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <limits>
#include <random>
#include <string>
#include <unsupported/Eigen/MatrixFunctions>

#include "pslab/errors.hpp"

namespace pslab {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
// Pivots below this are treated as an exact breakdown.
constexpr double kPivotFloor = 1e4 * DBL_MIN;

CMat random_block(std::ptrdiff_t n, std::ptrdiff_t p, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  CMat V(n, p);
  for (std::ptrdiff_t j = 0; j < p; ++j)
    for (std::ptrdiff_t i = 0; i < n; ++i) V(i, j) = cplx(nd(rng), nd(rng));
  return V;
}

template <class Mat>
Mat orthonormalize(const Mat& W) {
  Eigen::HouseholderQR<Mat> qr(W);
  return qr.householderQ() * Mat::Identity(W.rows(), W.cols());
}

// Restarted Lanczos on W = (T^H T)^{-1} = T^{-1} T^{-H}, shared by the
// tridiagonal, Hessenberg and dense backends. Full reorthogonalization keeps
// clustered small singular values from stalling the iteration; the returned
// value is |T y| for the final unit Ritz vector y.
template <class Op>
SigmaResult sigma_iterate(const Op& op, std::ptrdiff_t n, double scale, const SigmaOptions& opt) {
  const std::ptrdiff_t m = std::min<std::ptrdiff_t>(std::max(opt.krylov, 2), n);
  // A real start vector makes the runs for conj(M) exact conjugates, so
  // norms of real operators come out even in lambda.
  CVec v = random_block(n, 1, opt.seed).col(0).real().cast<cplx>();
  v.normalize();
  int steps = 0;
  for (int restart = 0; restart <= opt.max_restarts; ++restart) {
    CMat Q(n, m + 1);
    RVec a = RVec::Zero(m), b = RVec::Zero(m);
    Q.col(0) = v;
    std::ptrdiff_t mm = m;
    // Largest Ritz pair of the leading k x k Lanczos matrix and its residual.
    auto ritz = [&](std::ptrdiff_t k, RVec& s) {
      RMat T = RMat::Zero(k, k);
      for (std::ptrdiff_t j = 0; j < k; ++j) {
        T(j, j) = a(j);
        if (j + 1 < k) T(j, j + 1) = T(j + 1, j) = b(j);
      }
      Eigen::SelfAdjointEigenSolver<RMat> es(T);
      s = es.eigenvectors().col(k - 1);
      return std::pair{es.eigenvalues()(k - 1), b(k - 1) * std::abs(s(k - 1))};
    };
    for (std::ptrdiff_t j = 0; j < m; ++j) {
      CVec w = op.solve(op.solve_adjoint(CMat(Q.col(j)))).col(0);
      ++steps;
      for (int pass = 0; pass < 2; ++pass) {
        const CVec h = Q.leftCols(j + 1).adjoint() * w;
        w -= Q.leftCols(j + 1) * h;
        a(j) += h(j).real();
      }
      b(j) = w.norm();
      if (!std::isfinite(b(j))) throw NearSingular("shifted solve overflowed");
      if (b(j) <= kEps * std::abs(a(j))) {
        mm = j + 1;
        b(j) = 0.0;
        break;
      }
      Q.col(j + 1) = w / b(j);
      if ((j + 1) % 8 == 0 && j + 1 < m) {
        RVec s;
        const auto [theta, res] = ritz(j + 1, s);
        if (res <= opt.tol * theta) {
          mm = j + 1;
          break;
        }
      }
    }
    RVec s;
    const auto [theta, res] = ritz(mm, s);
    v = Q.leftCols(mm) * s.cast<cplx>();
    v.normalize();
    if (res <= opt.tol * theta || mm < m) {
      const double smin = op.apply(CMat(v)).col(0).norm();
      if (smin <= static_cast<double>(n) * kEps * scale) {
        throw NearSingular("shift lies in the spectrum to working precision (sigma_min = " +
                           std::to_string(smin) + ")");
      }
      return {smin, steps, v};
    }
  }
  throw NoConvergence("Lanczos iteration for sigma_min did not converge in " + std::to_string(steps) + " steps");
}

struct TriOp {
  const TridiagLU& lu;
  CMat solve(const CMat& B) const { return lu.solve(B); }
  CMat solve_adjoint(const CMat& B) const { return lu.solve_adjoint(B); }
  CMat apply(const CMat& X) const {
    CMat Y(X.rows(), X.cols());
    for (Eigen::Index j = 0; j < X.cols(); ++j) Y.col(j) = lu.apply(X.col(j));
    return Y;
  }
};

struct HessOp {
  const HessenbergLU& lu;
  CMat solve(const CMat& B) const { return lu.solve(B); }
  CMat solve_adjoint(const CMat& B) const { return lu.solve_adjoint(B); }
  CMat apply(const CMat& X) const { return lu.apply(X); }
};

struct DenseOp {
  const CMat& T;
  const Eigen::PartialPivLU<CMat>& lu;
  CMat solve(const CMat& B) const { return lu.solve(B); }
  CMat solve_adjoint(const CMat& B) const { return lu.adjoint().solve(B); }
  CMat apply(const CMat& X) const { return T * X; }
};

}  // namespace

// ---------------------------------------------------------------------------
// TridiagLU

TridiagLU::TridiagLU(CVec sub, CVec diag, CVec sup)
    : a_sub_(std::move(sub)), a_diag_(std::move(diag)), a_sup_(std::move(sup)) {
  const std::ptrdiff_t n = a_diag_.size();
  if (n == 0) throw InvalidArgument("empty tridiagonal system");
  dl_ = a_sub_;
  d_ = a_diag_;
  du_ = a_sup_;
  du2_ = CVec::Zero(std::max<std::ptrdiff_t>(n - 2, 0));
  ipiv_.resize(n);
  max_abs_ = a_diag_.cwiseAbs().maxCoeff();
  if (n > 1) max_abs_ = std::max({max_abs_, a_sub_.cwiseAbs().maxCoeff(), a_sup_.cwiseAbs().maxCoeff()});
  for (std::ptrdiff_t i = 0; i + 1 < n; ++i) {
    if (std::abs(d_(i)) >= std::abs(dl_(i))) {
      ipiv_[i] = i;
      if (d_(i) != 0.0) {
        const cplx fact = dl_(i) / d_(i);
        dl_(i) = fact;
        d_(i + 1) -= fact * du_(i);
      }
    } else {
      ipiv_[i] = i + 1;
      const cplx fact = d_(i) / dl_(i);
      d_(i) = dl_(i);
      dl_(i) = fact;
      const cplx temp = du_(i);
      du_(i) = d_(i + 1);
      d_(i + 1) = temp - fact * d_(i + 1);
      if (i + 2 < n) {
        du2_(i) = du_(i + 1);
        du_(i + 1) = -fact * du_(i + 1);
      }
    }
  }
  ipiv_[n - 1] = n - 1;
  min_pivot_ = d_.cwiseAbs().minCoeff();
  if (!(min_pivot_ > kPivotFloor * std::max(1.0, max_abs_))) {
    throw NearSingular("tridiagonal pivot underflow (|pivot| = " + std::to_string(min_pivot_) + ")");
  }
}

TridiagLU TridiagLU::shifted(const TridiagonalOperator& T, cplx zeta) {
  const std::ptrdiff_t n = T.n();
  CVec d = (-T.diag).cast<cplx>();
  d.array() += zeta;
  CVec sub = (-T.sub).cast<cplx>();
  CVec sup = (-T.sup).cast<cplx>();
  (void)n;
  return TridiagLU(std::move(sub), std::move(d), std::move(sup));
}

CVec TridiagLU::solve(const CVec& bin) const {
  const std::ptrdiff_t n = d_.size();
  CVec b = bin;
  for (std::ptrdiff_t i = 0; i + 1 < n; ++i) {
    if (ipiv_[i] == i) {
      b(i + 1) -= dl_(i) * b(i);
    } else {
      const cplx temp = b(i);
      b(i) = b(i + 1);
      b(i + 1) = temp - dl_(i) * b(i);
    }
  }
  b(n - 1) /= d_(n - 1);
  if (n > 1) b(n - 2) = (b(n - 2) - du_(n - 2) * b(n - 1)) / d_(n - 2);
  for (std::ptrdiff_t i = n - 3; i >= 0; --i) {
    b(i) = (b(i) - du_(i) * b(i + 1) - du2_(i) * b(i + 2)) / d_(i);
  }
  return b;
}

CVec TridiagLU::solve_adjoint(const CVec& bin) const {
  const std::ptrdiff_t n = d_.size();
  CVec b = bin;
  b(0) /= std::conj(d_(0));
  if (n > 1) b(1) = (b(1) - std::conj(du_(0)) * b(0)) / std::conj(d_(1));
  for (std::ptrdiff_t i = 2; i < n; ++i) {
    b(i) = (b(i) - std::conj(du_(i - 1)) * b(i - 1) - std::conj(du2_(i - 2)) * b(i - 2)) / std::conj(d_(i));
  }
  for (std::ptrdiff_t i = n - 2; i >= 0; --i) {
    if (ipiv_[i] == i) {
      b(i) -= std::conj(dl_(i)) * b(i + 1);
    } else {
      const cplx temp = b(i + 1);
      b(i + 1) = b(i) - std::conj(dl_(i)) * temp;
      b(i) = temp;
    }
  }
  return b;
}

CMat TridiagLU::solve(const CMat& B) const {
  CMat X(B.rows(), B.cols());
  for (Eigen::Index j = 0; j < B.cols(); ++j) X.col(j) = solve(CVec(B.col(j)));
  return X;
}

CMat TridiagLU::solve_adjoint(const CMat& B) const {
  CMat X(B.rows(), B.cols());
  for (Eigen::Index j = 0; j < B.cols(); ++j) X.col(j) = solve_adjoint(CVec(B.col(j)));
  return X;
}

CVec TridiagLU::apply(const CVec& x) const {
  const std::ptrdiff_t n = a_diag_.size();
  CVec y(n);
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    cplx acc = a_diag_(i) * x(i);
    if (i > 0) acc += a_sub_(i - 1) * x(i - 1);
    if (i + 1 < n) acc += a_sup_(i) * x(i + 1);
    y(i) = acc;
  }
  return y;
}

// ---------------------------------------------------------------------------
// HessenbergLU

HessenbergLU HessenbergLU::shifted(const CMat& H, cplx zeta) {
  const std::ptrdiff_t n = H.rows();
  if (n == 0 || H.cols() != n) throw InvalidArgument("HessenbergLU needs a nonempty square matrix");
  HessenbergLU f;
  f.A_ = -H;
  for (std::ptrdiff_t j = 0; j < n; ++j)
    for (std::ptrdiff_t i = j + 2; i < n; ++i) f.A_(i, j) = 0.0;
  f.A_.diagonal().array() += zeta;
  f.max_abs_ = f.A_.cwiseAbs().maxCoeff();
  f.U_ = f.A_;
  f.mult_ = CVec::Zero(std::max<std::ptrdiff_t>(n - 1, 0));
  f.swap_.assign(std::max<std::ptrdiff_t>(n - 1, 0), false);
  CMat& U = f.U_;
  for (std::ptrdiff_t k = 0; k + 1 < n; ++k) {
    if (std::abs(U(k + 1, k)) > std::abs(U(k, k))) {
      U.row(k).tail(n - k).swap(U.row(k + 1).tail(n - k));
      f.swap_[k] = true;
    }
    if (U(k, k) != 0.0) {
      const cplx m = U(k + 1, k) / U(k, k);
      f.mult_(k) = m;
      U.row(k + 1).tail(n - k - 1) -= m * U.row(k).tail(n - k - 1);
    }
    U(k + 1, k) = 0.0;
  }
  f.min_pivot_ = U.diagonal().cwiseAbs().minCoeff();
  if (!(f.min_pivot_ > kPivotFloor * std::max(1.0, f.max_abs_))) {
    throw NearSingular("Hessenberg pivot underflow (|pivot| = " + std::to_string(f.min_pivot_) + ")");
  }
  return f;
}

CMat HessenbergLU::solve(const CMat& B) const {
  CMat Y = B;
  for (std::ptrdiff_t k = 0; k + 1 < n(); ++k) {
    if (swap_[k]) Y.row(k).swap(Y.row(k + 1));
    Y.row(k + 1) -= mult_(k) * Y.row(k);
  }
  return U_.triangularView<Eigen::Upper>().solve(Y);
}

CMat HessenbergLU::solve_adjoint(const CMat& B) const {
  CMat Y = U_.adjoint().triangularView<Eigen::Lower>().solve(B);
  for (std::ptrdiff_t k = n() - 2; k >= 0; --k) {
    Y.row(k) -= std::conj(mult_(k)) * Y.row(k + 1);
    if (swap_[k]) Y.row(k).swap(Y.row(k + 1));
  }
  return Y;
}

CMat HessenbergLU::apply(const CMat& X) const { return A_ * X; }

// ---------------------------------------------------------------------------
// smallest singular value

double smallest_singular_value_svd(const CMat& base, cplx zeta) {
  CMat T = -base;
  T.diagonal().array() += zeta;
  Eigen::BDCSVD<CMat> svd(T);
  return svd.singularValues()(svd.singularValues().size() - 1);
}

SigmaResult smallest_singular_value(const TridiagonalOperator& T, cplx zeta, const SigmaOptions& opt) {
  const std::ptrdiff_t n = T.n();
  if (n <= 8) {
    const double s = smallest_singular_value_svd(T.dense().cast<cplx>(), zeta);
    const TridiagLU probe = TridiagLU::shifted(T, zeta);  // pivot check only
    if (s <= n * kEps * probe.max_abs()) throw NearSingular("shift lies in the spectrum");
    return {s, 0, CVec()};
  }
  const TridiagLU lu = TridiagLU::shifted(T, zeta);
  return sigma_iterate(TriOp{lu}, n, lu.max_abs(), opt);
}

SigmaResult smallest_singular_value(const CMat& base, cplx zeta, const SigmaOptions& opt) {
  const std::ptrdiff_t n = base.rows();
  CMat T = -base;
  T.diagonal().array() += zeta;
  const double scale = T.cwiseAbs().maxCoeff();
  if (n <= 8) {
    Eigen::JacobiSVD<CMat> svd(T);
    const double s = svd.singularValues()(n - 1);
    if (s <= n * kEps * scale) throw NearSingular("shift lies in the spectrum");
    return {s, 0, CVec()};
  }
  Eigen::PartialPivLU<CMat> lu(T);
  const double piv = lu.matrixLU().diagonal().cwiseAbs().minCoeff();
  if (!(piv > kPivotFloor * std::max(1.0, scale))) throw NearSingular("dense LU pivot underflow");
  return sigma_iterate(DenseOp{T, lu}, n, scale, opt);
}

SigmaResult smallest_singular_value_hessenberg(const CMat& H, cplx zeta, const SigmaOptions& opt) {
  const HessenbergLU lu = HessenbergLU::shifted(H, zeta);
  if (lu.n() <= 8) {
    Eigen::JacobiSVD<CMat> svd(lu.apply(CMat::Identity(lu.n(), lu.n())));
    const double s = svd.singularValues()(lu.n() - 1);
    if (s <= lu.n() * kEps * lu.max_abs()) throw NearSingular("shift lies in the spectrum");
    return {s, 0, CVec()};
  }
  return sigma_iterate(HessOp{lu}, lu.n(), lu.max_abs(), opt);
}

SigmaResult smallest_singular_value(const RMat& base, cplx zeta, const SigmaOptions& opt) {
  return smallest_singular_value(CMat(base.cast<cplx>()), zeta, opt);
}

// ---------------------------------------------------------------------------
// eigenvalues

EigResult eigenvalues(const RMat& M, const EigOptions& opt) {
  if (M.rows() != M.cols()) throw InvalidArgument("eigenvalues: matrix not square");
  if (M.rows() > opt.dense_cap) {
    throw SizingError("dimension " + std::to_string(M.rows()) + " exceeds dense cap " +
                      std::to_string(opt.dense_cap));
  }
  EigResult r;
  if (M.rows() == 0) return r;
  Eigen::EigenSolver<RMat> es(M, opt.vectors);
  if (es.info() != Eigen::Success) throw NoConvergence("real Schur iteration failed");
  r.eigenvalues = es.eigenvalues();
  if (opt.vectors) r.vectors = es.eigenvectors();
  return r;
}

EigResult eigenvalues(const TridiagonalOperator& T, const EigOptions& opt) {
  if (opt.vectors) return eigenvalues(T.dense(), opt);
  const std::ptrdiff_t n = T.n();
  EigResult r;
  r.eigenvalues.resize(n);
  std::ptrdiff_t start = 0;
  // A zero in either off-diagonal makes T block triangular there, so the
  // spectrum is the union of the spectra of the diagonal blocks.
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const bool cut = (i + 1 == n) || T.sub(i) == 0.0 || T.sup(i) == 0.0;
    if (!cut) continue;
    const std::ptrdiff_t m = i + 1 - start;
    RMat B = RMat::Zero(m, m);
    for (std::ptrdiff_t a = 0; a < m; ++a) {
      B(a, a) = T.diag(start + a);
      if (a + 1 < m) {
        B(a + 1, a) = T.sub(start + a);
        B(a, a + 1) = T.sup(start + a);
      }
    }
    r.eigenvalues.segment(start, m) = eigenvalues(B, opt).eigenvalues;
    start = i + 1;
  }
  return r;
}

// ---------------------------------------------------------------------------
// exponentials and norms

namespace {

template <class Mat>
Mat propagator_impl(const Mat& M, double t) {
  if (t < 0.0) throw InvalidArgument("propagator requires t >= 0");
  if (M.rows() == 0) return M;
  const double nrm = M.cwiseAbs().colwise().sum().maxCoeff();
  if (!std::isfinite(nrm * t) || nrm * t > 1e300) throw Overflow("t*||M|| outside the representable range");
  if (t == 0.0) return Mat::Identity(M.rows(), M.cols());
  Mat E = (t * M).exp();
  if (!E.allFinite()) throw Overflow("matrix exponential overflowed");
  return E;
}

template <class Mat>
double largest_sv_impl(const Mat& E, const NormOptions& opt) {
  using S = typename Mat::Scalar;
  const std::ptrdiff_t m = std::min(E.rows(), E.cols());
  if (m == 0) return 0.0;
  if (m <= 32) {
    Eigen::JacobiSVD<Mat> svd(E);
    return svd.singularValues()(0);
  }
  const std::ptrdiff_t p = std::min<std::ptrdiff_t>(opt.block, m);
  Mat V;
  if constexpr (std::is_same_v<S, double>) {
    V = orthonormalize(RMat(random_block(E.cols(), p, opt.seed).real()));
  } else {
    V = orthonormalize(random_block(E.cols(), p, opt.seed));
  }
  double prev = -1.0;
  for (int it = 0; it < opt.max_iter; ++it) {
    const Mat EV = E * V;
    Eigen::JacobiSVD<Mat> svd(EV, Eigen::ComputeThinV);
    const double smax = svd.singularValues()(0);
    if (smax == 0.0) return 0.0;
    if (std::abs(smax - prev) <= opt.tol * smax) return smax;
    prev = smax;
    V = orthonormalize(Mat(E.adjoint() * (EV * svd.matrixV())));
  }
  Eigen::BDCSVD<Mat> svd(E);
  return svd.singularValues()(0);
}

}  // namespace

RMat propagator(const RMat& M, double t) { return propagator_impl(M, t); }
CMat propagator(const CMat& M, double t) { return propagator_impl(M, t); }

double largest_singular_value(const RMat& E, const NormOptions& opt) { return largest_sv_impl(E, opt); }
double largest_singular_value(const CMat& E, const NormOptions& opt) { return largest_sv_impl(E, opt); }

RVec expv(const RMat& M, double t, const RVec& v, double tol) {
  const std::ptrdiff_t n = v.size();
  const int m = static_cast<int>(std::min<std::ptrdiff_t>(30, n));
  const double nrm = M.cwiseAbs().colwise().sum().maxCoeff();
  RVec w = v;
  double done = 0.0;
  double tau = t;
  while (done < t) {
    tau = std::min(tau, t - done);
    const double beta = w.norm();
    if (beta == 0.0) return w;
    RMat V(n, m + 1);
    RMat H = RMat::Zero(m + 1, m);
    V.col(0) = w / beta;
    int mm = m;
    double hnext = 0.0;
    for (int j = 0; j < m; ++j) {
      RVec q = M * V.col(j);
      for (int pass = 0; pass < 2; ++pass) {
        for (int i = 0; i <= j; ++i) {
          const double hij = V.col(i).dot(q);
          H(i, j) += hij;
          q -= hij * V.col(i);
        }
      }
      hnext = q.norm();
      if (hnext <= 1e-14 * std::max(nrm, 1.0)) {
        mm = j + 1;
        hnext = 0.0;
        break;
      }
      H(j + 1, j) = hnext;
      V.col(j + 1) = q / hnext;
    }
    RMat E;
    for (int tries = 0;; ++tries) {
      E = (tau * H.topLeftCorner(mm, mm)).exp();
      // Relative to the step's output, so strongly decaying runs keep their
      // relative accuracy.
      const double err = hnext * tau * std::abs(E(mm - 1, 0));
      if (err <= tol * E.col(0).norm() || tries > 60) break;
      tau *= 0.5;
    }
    w = beta * (V.leftCols(mm) * E.col(0));
    done += tau;
    tau *= 2.0;
  }
  return w;
}

double propagator_norm(const RMat& M, double t, const std::optional<RMat>& restrict, const NormOptions& opt) {
  const std::ptrdiff_t n = M.rows();
  if (t < 0.0) throw InvalidArgument("propagator_norm requires t >= 0");
  if (n <= opt.dense_cap) {
    const RMat E = propagator(M, t);
    if (restrict) return largest_singular_value(RMat(restrict->transpose() * E * *restrict), opt);
    return largest_singular_value(E, opt);
  }
  // Krylov mode: restarted Lanczos on B^T E^T E B with E applied through expv.
  const RMat B = restrict ? *restrict : RMat::Identity(n, n);
  const RMat Mt = M.transpose();
  auto gram = [&](const RVec& x) { return RVec(B.transpose() * expv(Mt, t, B * RVec(B.transpose() * expv(M, t, B * x)))); };
  const std::ptrdiff_t d = B.cols();
  const std::ptrdiff_t m = std::min<std::ptrdiff_t>(40, d);
  std::mt19937_64 rng(opt.seed);
  std::normal_distribution<double> nd;
  RVec v(d);
  for (auto& c : v) c = nd(rng);
  v.normalize();
  for (int restart = 0; restart < opt.max_iter; ++restart) {
    RMat Qk(d, m + 1);
    RVec a = RVec::Zero(m), b = RVec::Zero(m);
    Qk.col(0) = v;
    std::ptrdiff_t mm = m;
    for (std::ptrdiff_t j = 0; j < m; ++j) {
      RVec w = gram(Qk.col(j));
      for (int pass = 0; pass < 2; ++pass) {
        const RVec h = Qk.leftCols(j + 1).transpose() * w;
        w -= Qk.leftCols(j + 1) * h;
        a(j) += h(j);
      }
      b(j) = w.norm();
      if (b(j) <= kEps * std::abs(a(j))) {
        mm = j + 1;
        b(j) = 0.0;
        break;
      }
      Qk.col(j + 1) = w / b(j);
    }
    RMat T = RMat::Zero(mm, mm);
    for (std::ptrdiff_t j = 0; j < mm; ++j) {
      T(j, j) = a(j);
      if (j + 1 < mm) T(j, j + 1) = T(j + 1, j) = b(j);
    }
    Eigen::SelfAdjointEigenSolver<RMat> es(T);
    const double theta = es.eigenvalues()(mm - 1);
    if (theta <= 0.0) return 0.0;
    const RVec s = es.eigenvectors().col(mm - 1);
    v = Qk.leftCols(mm) * s;
    v.normalize();
    if (b(mm - 1) * std::abs(s(mm - 1)) <= 1e-9 * theta || mm < m) {
      return RVec(B.transpose() * expv(M, t, B * v)).norm();
    }
  }
  throw NoConvergence("Krylov Lanczos iteration for the propagator norm did not converge");
}

}  // namespace pslab
