#include "pslab/spectral_operators.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <string>

#include "pslab/errors.hpp"

namespace pslab {

namespace {

constexpr int kMaxModes = 5'000'000;

void check_sizing(const KolmogorovSpec& spec) {
  if (spec.N > kMaxModes) {
    throw SizingError("N = " + std::to_string(spec.N) + " exceeds the supported truncation");
  }
  const double scale = std::abs(spec.alpha * spec.l) * 0.5;
  const double lap = static_cast<double>(spec.N) * spec.N + static_cast<double>(spec.l) * spec.l;
  if (!std::isfinite(scale) || !std::isfinite(lap) || scale * spec.N > 1e300) {
    throw SizingError("alpha*l*N outside the representable range");
  }
}

double b_of(int k, int l) {
  return 1.0 - 1.0 / (static_cast<double>(k) * k + static_cast<double>(l) * l);
}

std::vector<int> mode_labels(int N) {
  std::vector<int> m(2 * N + 1);
  for (int i = 0; i <= 2 * N; ++i) m[i] = i - N;
  return m;
}

}  // namespace

void KolmogorovSpec::validate(int min_modes) const {
  if (l == 0) throw InvalidArgument("l must be nonzero");
  if (N < min_modes) {
    throw InvalidArgument("N = " + std::to_string(N) + " below minimum " + std::to_string(min_modes));
  }
  if (!std::isfinite(alpha)) throw InvalidArgument("alpha must be finite");
}

int default_modes(double alpha, int l) {
  const double s = 8.0 * std::sqrt(std::abs(alpha * l));
  return std::max(128, static_cast<int>(std::ceil(s)));
}

double TridiagonalOperator::entry(std::ptrdiff_t i, std::ptrdiff_t j) const {
  if (i == j) return diag(i);
  if (i == j + 1) return sub(j);
  if (j == i + 1) return sup(i);
  return 0.0;
}

RMat TridiagonalOperator::dense() const {
  const auto m = n();
  RMat out = RMat::Zero(m, m);
  for (std::ptrdiff_t i = 0; i < m; ++i) out(i, i) = diag(i);
  for (std::ptrdiff_t i = 0; i + 1 < m; ++i) {
    out(i + 1, i) = sub(i);
    out(i, i + 1) = sup(i);
  }
  return out;
}

template <class V>
static V tri_apply(const TridiagonalOperator& t, const V& x) {
  const auto m = t.n();
  V y(m);
  for (std::ptrdiff_t i = 0; i < m; ++i) {
    auto acc = t.diag(i) * x(i);
    if (i > 0) acc += t.sub(i - 1) * x(i - 1);
    if (i + 1 < m) acc += t.sup(i) * x(i + 1);
    y(i) = acc;
  }
  return y;
}

CVec TridiagonalOperator::apply(const CVec& x) const { return tri_apply(*this, x); }
RVec TridiagonalOperator::apply(const RVec& x) const { return tri_apply(*this, x); }

std::ptrdiff_t TridiagonalOperator::index_of(int k) const {
  auto it = std::find(modes.begin(), modes.end(), k);
  return it == modes.end() ? -1 : static_cast<std::ptrdiff_t>(it - modes.begin());
}

RVec b2_multipliers(const KolmogorovSpec& spec) {
  spec.validate();
  RVec b(2 * spec.N + 1);
  for (int i = 0; i <= 2 * spec.N; ++i) b(i) = b_of(i - spec.N, spec.l);
  return b;
}

RVec laplacian_diag(const KolmogorovSpec& spec) {
  spec.validate();
  RVec d(2 * spec.N + 1);
  for (int i = 0; i <= 2 * spec.N; ++i) {
    const double k = i - spec.N;
    d(i) = -(k * k + static_cast<double>(spec.l) * spec.l);
  }
  return d;
}

TridiagonalOperator assemble_lambda_hat(const KolmogorovSpec& spec) {
  spec.validate();
  check_sizing(spec);
  const RVec b = b2_multipliers(spec);
  const std::ptrdiff_t n = b.size();
  TridiagonalOperator r;
  r.modes = mode_labels(spec.N);
  r.diag = RVec::Zero(n);
  r.sub.resize(n - 1);
  r.sup.resize(n - 1);
  for (std::ptrdiff_t i = 0; i + 1 < n; ++i) {
    r.sub(i) = 0.5 * b(i);       // row k = i+1 reads u_{k-1}
    r.sup(i) = -0.5 * b(i + 1);  // row k = i reads u_{k+1}
  }
  return r;
}

TridiagonalOperator assemble_kolmogorov(const KolmogorovSpec& spec) {
  TridiagonalOperator r = assemble_lambda_hat(spec);
  const double s = spec.alpha * spec.l;
  TridiagonalOperator out;
  out.modes = r.modes;
  out.diag = laplacian_diag(spec);
  out.sub = -s * r.sub;
  out.sup = -s * r.sup;
  // Keep exact zeros exact (b_0 = 0 when |l| = 1), including their sign.
  for (Eigen::Index i = 0; i < out.sub.size(); ++i) {
    if (r.sub(i) == 0.0) out.sub(i) = 0.0;
    if (r.sup(i) == 0.0) out.sup(i) = 0.0;
  }
  return out;
}

ProjectedOperator project(const TridiagonalOperator& op, int l) {
  if (l == 0) throw InvalidArgument("l must be nonzero");
  ProjectedOperator p;
  p.base = op;
  if (std::abs(l) == 1) p.removed_modes.push_back(0);
  for (std::ptrdiff_t i = 0; i < op.n(); ++i) {
    if (std::find(p.removed_modes.begin(), p.removed_modes.end(), op.modes[i]) ==
        p.removed_modes.end()) {
      p.kept.push_back(i);
    }
  }
  const auto m = static_cast<std::ptrdiff_t>(p.kept.size());
  TridiagonalOperator& r = p.reduced;
  r.diag.resize(m);
  r.sub = RVec::Zero(std::max<std::ptrdiff_t>(m - 1, 0));
  r.sup = RVec::Zero(std::max<std::ptrdiff_t>(m - 1, 0));
  for (std::ptrdiff_t a = 0; a < m; ++a) {
    r.modes.push_back(op.modes[p.kept[a]]);
    r.diag(a) = op.diag(p.kept[a]);
    if (a + 1 < m) {
      r.sub(a) = op.entry(p.kept[a + 1], p.kept[a]);
      r.sup(a) = op.entry(p.kept[a], p.kept[a + 1]);
    }
  }
  return p;
}

CMat lambda_hat_dense(const KolmogorovSpec& spec) {
  return cplx(0.0, -1.0) * assemble_lambda_hat(spec).dense().cast<cplx>();
}

CMat assemble_b3(const KolmogorovSpec& spec) {
  spec.validate();
  const int N = spec.N;
  const int l = spec.l;
  const std::ptrdiff_t n = 2 * N + 1;
  const cplx I(0.0, 1.0);
  // (d_y - l) A_l^{-1} acting on mode j.
  auto d = [&](int j) {
    const double lap = -(static_cast<double>(j) * j + static_cast<double>(l) * l);
    return (I * static_cast<double>(j) - static_cast<double>(l)) / lap;
  };
  CMat B = CMat::Zero(n, n);
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const int k = static_cast<int>(i) - N;
    if (i > 0) {
      const int j = k - 1;  // sin: +1/(2i) u_{k-1}, cos: +1/2 u_{k-1}
      B(i, i - 1) = d(j) / (2.0 * I) + 0.5 * b_of(j, l);
    }
    if (i + 1 < n) {
      const int j = k + 1;  // sin: -1/(2i) u_{k+1}, cos: +1/2 u_{k+1}
      B(i, i + 1) = -d(j) / (2.0 * I) + 0.5 * b_of(j, l);
    }
  }
  return B;
}

RMat y_basis(const KolmogorovSpec& spec) {
  spec.validate();
  const std::ptrdiff_t n = 2 * spec.N + 1;
  const bool drop = std::abs(spec.l) == 1;
  RMat P = RMat::Zero(n, drop ? n - 1 : n);
  std::ptrdiff_t c = 0;
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    if (drop && i == spec.N) continue;
    P(i, c++) = 1.0;
  }
  return P;
}

}  // namespace pslab
