#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "pslab/errors.hpp"
#include "pslab/matrix_engine.hpp"
#include "pslab/spectral_operators.hpp"
#include "support.hpp"

using namespace pslab;
using testing::Gen;

namespace {

double b_of(int k, int l) { return 1.0 - 1.0 / (static_cast<double>(k) * k + static_cast<double>(l) * l); }

// Fourier matrices of the individual factors, built independently of the
// library's direct formulas.
CMat sin_mult(int N) {
  const int n = 2 * N + 1;
  CMat S = CMat::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    if (i > 0) S(i, i - 1) = 1.0 / cplx(0.0, 2.0);
    if (i + 1 < n) S(i, i + 1) = -1.0 / cplx(0.0, 2.0);
  }
  return S;
}
CMat cos_mult(int N) {
  const int n = 2 * N + 1;
  CMat C = CMat::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    if (i > 0) C(i, i - 1) = 0.5;
    if (i + 1 < n) C(i, i + 1) = 0.5;
  }
  return C;
}
CMat diag_of(int N, const std::function<cplx(int)>& f) {
  CVec d(2 * N + 1);
  for (int k = -N; k <= N; ++k) d(k + N) = f(k);
  return d.asDiagonal();
}

}  // namespace

TEST_CASE("b2 multipliers") {
  const RVec b1 = b2_multipliers({1, 0.0, 4});
  CHECK(b1(4) == 0.0);
  CHECK(b1(5) == doctest::Approx(0.5).epsilon(1e-15));
  const RVec b2 = b2_multipliers({2, 0.0, 4});
  CHECK(b2(4) == doctest::Approx(0.75).epsilon(1e-15));
}

TEST_CASE("pure Laplacian at alpha = 0") {
  const TridiagonalOperator L = assemble_kolmogorov({1, 0.0, 1});
  REQUIRE(L.n() == 3);
  CHECK(L.modes == std::vector<int>{-1, 0, 1});
  CHECK(L.diag(0) == -2.0);
  CHECK(L.diag(1) == -1.0);
  CHECK(L.diag(2) == -2.0);
  for (int i = 0; i < 2; ++i) {
    CHECK(L.sub(i) == 0.0);
    CHECK(L.sup(i) == 0.0);
  }
}

TEST_CASE("sine couplings at alpha = 10, l = 1") {
  const TridiagonalOperator L = assemble_kolmogorov({1, 10.0, 1});
  const auto i0 = L.index_of(0), i1 = L.index_of(1), im = L.index_of(-1);
  CHECK(L.entry(i1, i0) == 0.0);
  CHECK(L.entry(im, i0) == 0.0);
  CHECK(L.entry(i0, i1) == doctest::Approx(2.5).epsilon(1e-15));
  // Row 0 before deletion: -(alpha/2) b_{-1} and +(alpha/2) b_1.
  CHECK(L.entry(i0, im) == doctest::Approx(-10.0 / 2.0 * 0.5).epsilon(1e-15));
  CHECK(L.entry(i0, i1) == doctest::Approx(10.0 / 2.0 * 0.5).epsilon(1e-15));
}

TEST_CASE("property: entries follow the sine-coupling formula") {
  Gen g(11);
  for (int trial = 0; trial < 40; ++trial) {
    const int l = g.nonzero(-4, 4);
    const double alpha = g.uniform(-1e3, 1e3);
    const int N = g.integer(1, 40);
    const TridiagonalOperator L = assemble_kolmogorov({l, alpha, N});
    const double s = alpha * l / 2.0;
    for (int k = -N; k <= N; ++k) {
      const auto i = L.index_of(k);
      CHECK(L.diag(i) == -(static_cast<double>(k) * k + static_cast<double>(l) * l));
      if (k > -N) CHECK(L.entry(i, i - 1) == doctest::Approx(-s * b_of(k - 1, l)).epsilon(1e-14));
      if (k < N) CHECK(L.entry(i, i + 1) == doctest::Approx(s * b_of(k + 1, l)).epsilon(1e-14));
    }
    const RMat D = L.dense();
    for (int i = 0; i < D.rows(); ++i)
      for (int j = 0; j < D.cols(); ++j)
        if (std::abs(i - j) > 1) CHECK(D(i, j) == 0.0);
  }
}

TEST_CASE("Lambda_1 annihilates constants; Lambda_2 shifts e0 to k = +-1") {
  const TridiagonalOperator R1 = assemble_lambda_hat({1, 0.0, 8});
  RVec e0 = RVec::Zero(R1.n());
  e0(R1.index_of(0)) = 1.0;
  CHECK(R1.apply(e0).cwiseAbs().maxCoeff() == 0.0);

  const TridiagonalOperator R2 = assemble_lambda_hat({2, 0.0, 8});
  const RVec y = R2.apply(e0);
  for (int k = -8; k <= 8; ++k) {
    const double v = y(R2.index_of(k));
    if (k == 1 || k == -1) CHECK(v != 0.0);
    else CHECK(v == 0.0);
  }
}

TEST_CASE("Y-restricted Lambda_1 has real spectrum in [-1, 1]") {
  const KolmogorovSpec s{1, 0.0, 64};
  const CMat Y = y_basis(s).cast<cplx>();
  const CMat M = Y.adjoint() * lambda_hat_dense(s) * Y;
  Eigen::ComplexEigenSolver<CMat> es(M, false);
  for (const cplx& z : es.eigenvalues()) {
    CHECK(std::abs(z.imag()) <= 1e-8);
    CHECK(z.real() >= -1.0 - 1e-8);
    CHECK(z.real() <= 1.0 + 1e-8);
  }
}

TEST_CASE("projection") {
  SUBCASE("l = 2 keeps every mode") {
    const ProjectedOperator P = project(assemble_kolmogorov({2, 5.0, 4}), 2);
    CHECK(P.removed_modes.empty());
    CHECK(P.dim() == 9);
  }
  SUBCASE("l = 1 drops mode 0") {
    const ProjectedOperator P = project(assemble_kolmogorov({1, 5.0, 1}), 1);
    CHECK(P.removed_modes == std::vector<int>{0});
    CHECK(P.dim() == 2);
    CHECK(P.reduced.modes == std::vector<int>{-1, 1});
    CHECK(P.reduced.sub(0) == 0.0);
    CHECK(P.reduced.sup(0) == 0.0);
  }
  SUBCASE("reduced matrix equals the retained rows and columns") {
    const TridiagonalOperator L = assemble_kolmogorov({1, 37.0, 12});
    const ProjectedOperator P = project(L, 1);
    const RMat D = L.dense();
    const RMat Rd = P.reduced.dense();
    for (std::size_t a = 0; a < P.kept.size(); ++a)
      for (std::size_t b = 0; b < P.kept.size(); ++b) CHECK(Rd(a, b) == D(P.kept[a], P.kept[b]));
  }
}

TEST_CASE("B3 matches the product of its factors") {
  for (int l : {1, 2}) {
    const int N = 2;
    const KolmogorovSpec s{l, 0.0, N};
    const CMat B3 = assemble_b3(s);
    const CMat T = diag_of(N, [l](int k) { return cplx(-l, k); });
    const CMat Ainv = diag_of(N, [l](int k) { return cplx(-1.0 / (k * k + l * l), 0.0); });
    const CMat B2 = diag_of(N, [l](int k) { return cplx(b_of(k, l), 0.0); });
    const CMat ref = sin_mult(N) * T * Ainv + cos_mult(N) * B2;
    CHECK((B3 - ref).norm() <= 1e-14 * ref.norm());
    for (int i = 0; i < B3.rows(); ++i)
      for (int j = 0; j < B3.cols(); ++j)
        if (std::abs(i - j) > 2) CHECK(B3(i, j) == cplx(0.0));
    if (l == 1) {
      CVec e0 = CVec::Zero(2 * N + 1);
      e0(N) = 1.0;
      CHECK((B3 * e0 - ref * e0).norm() <= 1e-15);
    }
  }
}

TEST_CASE("B3 audit inequality on random vectors") {
  const KolmogorovSpec s{1, 0.0, 64};
  const CMat B3 = assemble_b3(s);
  const CMat Lam = lambda_hat_dense(s);
  const RVec negA = -laplacian_diag(s);
  Gen g(5);
  for (int trial = 0; trial < 100; ++trial) {
    CVec u = g.cnormal(B3.rows());
    u(64) = 0.0;  // u in Y_1
    u.normalize();
    const CVec Au = (-negA).cast<cplx>().cwiseProduct(u);
    const double lhs = std::abs((Lam * u).dot(Au).imag());
    const double rhs = std::sqrt(u.dot(negA.cast<cplx>().cwiseProduct(u)).real()) * (B3 * u).norm();
    CHECK(lhs <= 4.0 * rhs);
  }
}

TEST_CASE("sign-flip similarity and evenness of singular values") {
  Gen g(3);
  for (int trial = 0; trial < 10; ++trial) {
    const int l = g.nonzero(-3, 3);
    const double alpha = g.log_uniform(1.0, 1e3);
    const int N = g.integer(8, 40);
    const CMat Mp = assemble_kolmogorov({l, alpha, N}).dense().cast<cplx>();
    const CMat Mm = assemble_kolmogorov({l, -alpha, N}).dense().cast<cplx>();
    const double lam = g.uniform(-2.0, 2.0) * alpha;
    const cplx z(0.0, lam);
    const double a = smallest_singular_value_svd(Mp, z);
    CHECK(testing::rel(smallest_singular_value_svd(Mm, z), a) <= 1e-12);
    CHECK(testing::rel(smallest_singular_value_svd(Mp, std::conj(z)), a) <= 1e-12);
  }
}

TEST_CASE("B2-weighted symmetry of Lambda") {
  for (int l : {1, 2, 3, -2}) {
    const KolmogorovSpec s{l, 0.0, 20};
    const RMat R = assemble_lambda_hat(s).dense();
    const RMat BR = b2_multipliers(s).asDiagonal() * R;
    CHECK((BR + BR.transpose()).cwiseAbs().maxCoeff() <= 1e-14);
  }
}

TEST_CASE("B2 coercivity on Y_l") {
  for (int l : {1, 2, 3}) {
    const KolmogorovSpec s{l, 0.0, 32};
    const RMat Y = y_basis(s);
    const RMat G = Y.transpose() * b2_multipliers(s).asDiagonal() * Y;
    Eigen::SelfAdjointEigenSolver<RMat> es(G);
    double mn = 1e300;
    for (int k = -32; k <= 32; ++k)
      if (!(std::abs(l) == 1 && k == 0)) mn = std::min(mn, b_of(k, l));
    CHECK(es.eigenvalues().minCoeff() == doctest::Approx(mn).epsilon(1e-14));
    CHECK(mn >= 0.5);
  }
}

TEST_CASE("sizing rule and validation") {
  CHECK(default_modes(1e4, 1) == 800);
  CHECK(default_modes(1.0, 1) == 128);
  CHECK_THROWS_AS(assemble_kolmogorov({0, 1.0, 8}), InvalidArgument);
  CHECK_THROWS_AS(KolmogorovSpec({1, 1.0, 4}).validate(8), InvalidArgument);
  CHECK_THROWS_AS(assemble_kolmogorov({1, 1e308, 4000000}), SizingError);
}
