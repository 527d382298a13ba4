#include "pslab/semigroup_lab.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "pslab/errors.hpp"
#include "pslab/matrix_engine.hpp"
#include "pslab/parallel.hpp"

namespace pslab {

double spectral_gap(const ProjectedOperator& op) {
  const CVec ev = eigenvalues(op.reduced).eigenvalues;
  return -ev.real().maxCoeff();
}

std::vector<double> default_time_grid(double alpha_tilde) {
  const double s = 1.0 / std::sqrt(std::max(std::abs(alpha_tilde), 1.0));
  std::vector<double> t{0.0};
  for (int i = 0; i < 24; ++i) t.push_back(0.1 * s * std::pow(100.0, i / 23.0));
  for (double x : {0.25, 0.5, 1.0, 1.5, 2.0, 3.0, 4.0, 6.0}) t.push_back(x);
  std::sort(t.begin(), t.end());
  t.erase(std::unique(t.begin(), t.end()), t.end());
  return t;
}

// ---------------------------------------------------------------------------
// contour

double ContourSpec::real_part_at(double y) const {
  const double a = std::abs(alpha_tilde);
  const double r = std::sqrt(a);
  y = std::abs(y);
  if (y < a - r) return c * std::cbrt(a * (y - a));
  if (y <= a + r) return -c * r;
  return -c * (y - a);
}

bool ContourSpec::encloses(const CVec& eigs) const {
  for (const cplx& z : eigs) {
    if (!(z.real() < real_part_at(z.imag()))) return false;
  }
  return true;
}

Contour ContourSpec::pieces(double t) const {
  const double a = std::abs(alpha_tilde);
  const double r = std::sqrt(a);
  const double cc = c;
  const double s0 = -cc * std::pow(a, 2.0 / 3.0);
  const double s1 = -cc * r;
  const double s_end = s1 - 45.0 / t;
  auto panels_for = [t](double span) { return std::max(8, static_cast<int>(std::ceil(t * span / 2.0))); };

  ContourPiece curve;
  curve.z = [a, cc](double s) { return cplx(s, s * s * s / (a * cc * cc * cc) + a); };
  curve.dz = [a, cc](double s) { return cplx(1.0, 3.0 * s * s / (a * cc * cc * cc)); };
  curve.a = s0;
  curve.b = s1;
  curve.panels = panels_for(a - r + (s1 - s0));

  ContourPiece vert;
  vert.z = [s1](double y) { return cplx(s1, y); };
  vert.dz = [](double) { return cplx(0.0, 1.0); };
  vert.a = a - r;
  vert.b = a + r;
  vert.panels = panels_for(2.0 * r);

  ContourPiece ray;
  ray.z = [a, cc](double s) { return cplx(s, a - s / cc); };
  ray.dz = [cc](double) { return cplx(1.0, -1.0 / cc); };
  ray.a = s1;
  ray.b = s_end;
  ray.panels = panels_for((s1 - s_end) * (1.0 + 1.0 / cc));

  Contour out;
  for (const ContourPiece& up : {curve, vert, ray}) {
    ContourPiece low;
    low.z = [f = up.z](double s) { return std::conj(f(s)); };
    low.dz = [f = up.dz](double s) { return std::conj(f(s)); };
    low.a = up.b;
    low.b = up.a;
    low.panels = up.panels;
    out.push_back(up);
    out.push_back(low);
  }
  return out;
}

ContourSpec gap_calibrated_contour(const ProjectedOperator& op, double alpha_tilde) {
  ContourSpec c;
  c.alpha_tilde = alpha_tilde;
  c.c = 0.5 * spectral_gap(op) / std::sqrt(std::abs(alpha_tilde));
  return c;
}

// ---------------------------------------------------------------------------
// propagator traces

namespace {

struct Block {
  std::ptrdiff_t start;
  std::ptrdiff_t size;
};

// Maximal runs with nonzero coupling in at least one direction; the matrix is
// block diagonal across the gaps.
std::vector<Block> decoupled_blocks(const TridiagonalOperator& T) {
  std::vector<Block> out;
  std::ptrdiff_t start = 0;
  for (std::ptrdiff_t i = 0; i < T.n(); ++i) {
    const bool cut = i + 1 == T.n() || (T.sub(i) == 0.0 && T.sup(i) == 0.0);
    if (cut) {
      out.push_back({start, i + 1 - start});
      start = i + 1;
    }
  }
  return out;
}

RMat block_dense(const TridiagonalOperator& T, const Block& b) {
  RMat B = RMat::Zero(b.size, b.size);
  for (std::ptrdiff_t a = 0; a < b.size; ++a) {
    B(a, a) = T.diag(b.start + a);
    if (a + 1 < b.size) {
      B(a + 1, a) = T.sub(b.start + a);
      B(a, a + 1) = T.sup(b.start + a);
    }
  }
  return B;
}

RVec random_unit(std::ptrdiff_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  RVec v(n);
  for (auto& x : v) x = nd(rng);
  return v.normalized();
}

}  // namespace

PropagatorTrace trace_propagator(const KolmogorovSpec& spec, const std::vector<double>& times,
                                 const TraceOptions& opt) {
  spec.validate();
  if (times.empty() || times.front() != 0.0) throw InvalidArgument("time grid must start at t = 0");
  if (!std::is_sorted(times.begin(), times.end())) throw InvalidArgument("time grid must be sorted");
  const TridiagonalOperator full = assemble_kolmogorov(spec);
  const ProjectedOperator proj = project(full, spec.l);
  const TridiagonalOperator& Q = proj.reduced;
  const std::vector<Block> blocks = decoupled_blocks(Q);
  const bool with_p = std::abs(spec.l) == 1;

  // Row couplings of mode 0 into the retained modes. Column couplings vanish
  // (b_0 = 0), so P e^{tL} Q is the top row of exp of [[-1, r^T], [0, QLQ]].
  RVec r = RVec::Zero(Q.n());
  double p_diag = 0.0;
  if (with_p) {
    const std::ptrdiff_t i0 = full.index_of(0);
    if (full.entry(i0 - 1, i0) != 0.0 || full.entry(i0 + 1, i0) != 0.0) {
      throw InvalidArgument("mode 0 is not invariant; P-part formula does not apply");
    }
    r(i0 - 1) = full.entry(i0, i0 - 1);
    r(i0) = full.entry(i0, i0 + 1);
    p_diag = full.diag(i0);
  }

  RVec b(Q.n());
  for (std::ptrdiff_t i = 0; i < Q.n(); ++i) {
    const double k = Q.modes[i];
    b(i) = 1.0 - 1.0 / (k * k + static_cast<double>(spec.l) * spec.l);
  }
  const RVec u0 = random_unit(Q.n(), opt.seed);

  struct Sample {
    double q, p, e;
  };
  auto one = [&](std::size_t ti) {
    const double t = times[ti];
    double q = 0.0, psq = 0.0;
    RVec u(Q.n());
    for (const Block& blk : blocks) {
      const RMat B = block_dense(Q, blk);
      const RVec useg = u0.segment(blk.start, blk.size);
      const RVec rseg = r.segment(blk.start, blk.size);
      if (blk.size + 1 <= opt.dense_cap) {
        RMat M = RMat::Zero(blk.size + 1, blk.size + 1);
        M(0, 0) = p_diag;
        M.block(0, 1, 1, blk.size) = rseg.transpose();
        M.bottomRightCorner(blk.size, blk.size) = B;
        const RMat E = propagator(M, t);
        const RMat EB = E.bottomRightCorner(blk.size, blk.size);
        q = std::max(q, largest_singular_value(EB));
        psq += E.block(0, 1, 1, blk.size).squaredNorm();
        u.segment(blk.start, blk.size) = EB * useg;
      } else {
        NormOptions no;
        no.dense_cap = opt.dense_cap;
        q = std::max(q, propagator_norm(B, t, std::nullopt, no));
        u.segment(blk.start, blk.size) = expv(B, t, useg);
        if (with_p && rseg.squaredNorm() > 0.0) {
          RMat Mt = RMat::Zero(blk.size + 1, blk.size + 1);
          Mt(0, 0) = p_diag;
          Mt.block(1, 0, blk.size, 1) = rseg;
          Mt.bottomRightCorner(blk.size, blk.size) = B.transpose();
          RVec e0 = RVec::Zero(blk.size + 1);
          e0(0) = 1.0;
          psq += expv(Mt, t, e0).tail(blk.size).squaredNorm();
        }
      }
    }
    return Sample{q, std::sqrt(psq), u.dot(b.cwiseProduct(u))};
  };
  const std::vector<Sample> samples = parallel_map(times.size(), one);

  PropagatorTrace tr;
  tr.times = times;
  for (const auto& s : samples) {
    tr.q_norms.push_back(s.q);
    if (with_p) tr.p_norms.push_back(s.p);
    tr.b2_energy.push_back(s.e);
  }
  return tr;
}

DecayFit fit_decay(const PropagatorTrace& trace, double alpha_tilde, double floor) {
  const double t0 = 1.0 / std::sqrt(std::abs(alpha_tilde));
  std::vector<std::pair<double, double>> pts;
  for (std::size_t i = 0; i < trace.times.size(); ++i) {
    if (trace.times[i] < t0 * (1.0 - 1e-12)) continue;
    if (!(trace.q_norms[i] > floor)) break;
    pts.emplace_back(trace.times[i], std::log(trace.q_norms[i]));
  }
  if (pts.size() < 6) throw DegenerateInput("fewer than 6 resolvable samples in the decay window");
  const double n = static_cast<double>(pts.size());
  double mt = 0.0, my = 0.0;
  for (auto [t, y] : pts) {
    mt += t;
    my += y;
  }
  mt /= n;
  my /= n;
  double stt = 0.0, sty = 0.0;
  for (auto [t, y] : pts) {
    stt += (t - mt) * (t - mt);
    sty += (t - mt) * (y - my);
  }
  DecayFit fit;
  const double slope = sty / stt;
  fit.rate = -slope;
  fit.prefactor = std::exp(my - slope * mt);
  double ss = 0.0;
  for (auto [t, y] : pts) {
    const double e = y - (my + slope * (t - mt));
    ss += e * e;
  }
  fit.residual = std::sqrt(ss / n);
  fit.t_min = pts.front().first;
  fit.t_max = pts.back().first;
  fit.samples = pts.size();
  return fit;
}

// ---------------------------------------------------------------------------
// Dunford check

double dunford_check(const ProjectedOperator& op, double t, const ContourSpec& contour, int probes,
                     std::uint64_t seed) {
  const CVec ev = eigenvalues(op.reduced).eigenvalues;
  if (!contour.encloses(ev)) throw NearSingular("contour does not clear the spectrum; c is too large");
  const RMat E = propagator(op.reduced.dense(), t);
  const Contour path = contour.pieces(t);
  double worst = 0.0;
  for (int p = 0; p < probes; ++p) {
    const RVec f = random_unit(op.dim(), seed + static_cast<std::uint64_t>(p));
    const RVec exact = E * f;
    const CVec quad = contour_quadrature(op.reduced, t, path, f.cast<cplx>()).value;
    worst = std::max(worst, (quad - exact.cast<cplx>()).norm() / exact.norm());
  }
  return worst;
}

double dunford_check_vertical(const ProjectedOperator& op, double t, double x0, int probes, std::uint64_t seed) {
  const CVec ev = eigenvalues(op.reduced).eigenvalues;
  if (!(ev.real().maxCoeff() < x0)) throw NearSingular("vertical line does not clear the spectrum");
  const RMat M = op.reduced.dense();
  const RMat E = propagator(M, t);
  const double nrm = M.cwiseAbs().colwise().sum().maxCoeff();
  QuadratureOptions qo;
  qo.subtract_at = x0 + 1.0;
  qo.subtract_order = 4;
  double worst = 0.0;
  for (int p = 0; p < probes; ++p) {
    const RVec f = random_unit(op.dim(), seed + static_cast<std::uint64_t>(p));
    const RVec exact = E * f;
    RVec g = f;
    for (int k = 0; k < qo.subtract_order; ++k) g = M * g - *qo.subtract_at * g;
    // Tail of the remainder beyond |Im z| = Y is about e^{t x0}|g| / (pi k Y^k).
    const double k = qo.subtract_order;
    const double Y = std::max(10.0 * nrm + 10.0, std::pow(std::exp(t * x0) * g.norm() /
                                                               (M_PI * k * 1e-11 * exact.norm()), 1.0 / k));
    const Contour path = vertical_line(x0, Y, std::max(16, static_cast<int>(std::ceil(t * Y / 2.0))));
    const CVec quad = contour_quadrature(op.reduced, t, path, f.cast<cplx>(), qo).value;
    worst = std::max(worst, (quad - exact.cast<cplx>()).norm() / exact.norm());
  }
  return worst;
}

PhysicalRates physical_rates(const DecayFit& fit, double nu, double a, int l) {
  if (!(nu > 0.0)) throw InvalidArgument("nu must be positive");
  if (a == 0.0) throw InvalidArgument("a must be nonzero");
  PhysicalRates p;
  p.nu = nu;
  p.a = a;
  p.l = l;
  p.rate_physical = fit.rate * nu;
  p.threshold_time = 1.0 / std::sqrt(std::abs(a * l) * nu);
  p.c_dimensionless = fit.rate / std::sqrt(std::abs(a * l / nu));
  return p;
}

double short_time_bound(double t, int l) { return 2.0 * std::exp(-0.5 * (2.0 * l * l - 1.0) * t); }

}  // namespace pslab
