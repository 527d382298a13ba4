#include "pslab/resolvent_lab.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include <Eigen/Eigenvalues>

#include "pslab/errors.hpp"
#include "pslab/parallel.hpp"

namespace pslab {

std::string to_string(Model m) { return m == Model::kolmogorov ? "kolmogorov" : "oseen"; }

ResolventProblem ResolventProblem::kolmogorov(const KolmogorovSpec& spec) {
  spec.validate();
  ResolventProblem p;
  p.model_ = Model::kolmogorov;
  p.alpha_ = spec.alpha;
  p.l_ = spec.l;
  p.scale_ = spec.alpha * spec.l;
  if (p.scale_ == 0.0) p.scale_ = 1.0;
  p.proj_ = project(assemble_kolmogorov(spec), spec.l);
  return p;
}

ResolventProblem ResolventProblem::oseen(const OseenOperatorSet& set, double alpha) {
  ResolventProblem p;
  p.model_ = Model::oseen;
  p.alpha_ = alpha;
  p.l_ = 1;
  p.scale_ = alpha == 0.0 ? 1.0 : alpha;
  p.dense_ = restrict_Y(set, set.generator(alpha));
  // One unitary reduction per alpha; every shift then costs O(n^2).
  p.hess_ = Eigen::HessenbergDecomposition<CMat>(p.dense_).matrixH();
  return p;
}

std::ptrdiff_t ResolventProblem::dim() const {
  return model_ == Model::kolmogorov ? proj_.dim() : dense_.rows();
}

double resolvent_norm(const ProjectedOperator& op, double lambda, const SigmaOptions& opt) {
  return 1.0 / smallest_singular_value(op.reduced, cplx(0.0, -lambda), opt).sigma;
}

double resolvent_norm(const CMat& projected, double lambda, const SigmaOptions& opt) {
  return 1.0 / smallest_singular_value(projected, cplx(0.0, -lambda), opt).sigma;
}

double ResolventProblem::norm(double lambda) const {
  if (model_ == Model::kolmogorov) return resolvent_norm(proj_, lambda, sigma_options);
  return 1.0 / smallest_singular_value_hessenberg(hess_, cplx(0.0, -lambda), sigma_options).sigma;
}

// ---------------------------------------------------------------------------
// envelopes

std::string kolmogorov_regime(double alpha_tilde, double mu) {
  const double d = 1.0 / std::sqrt(std::abs(alpha_tilde));
  const double a = std::abs(mu);
  if (a > 1.0 + d) return "outer";
  if (a > 1.0 - d) return "band";
  return "inner";
}

double kolmogorov_envelope(double alpha, int l, double lambda, double C) {
  const double at = std::abs(alpha * l);
  if (at < 1.0) throw InvalidArgument("envelope requires |alpha l| >= 1");
  const double mu = std::abs(lambda / (alpha * l));
  const double d = 1.0 / std::sqrt(at);
  if (mu > 1.0 + d) return C / (at * (mu - 1.0));
  if (mu > 1.0 - d) return C * d;
  return C / (std::pow(at, 2.0 / 3.0) * std::cbrt(1.0 - mu));
}

std::vector<double> kolmogorov_seams(double alpha_tilde) {
  const double d = 1.0 / std::sqrt(std::abs(alpha_tilde));
  return {-1.0 - d, -1.0 + d, 1.0 - d, 1.0 + d};
}

std::string oseen_regime(double alpha, double mu) {
  const double a = std::abs(alpha);
  const double d = 1.0 / std::sqrt(a);
  const double c = 1.0 / std::cbrt(a);
  if (mu > 1.0 + d) return "outer";
  if (mu > 1.0 - d) return "band";
  if (mu > 0.5) return "inner";
  if (mu > c) return "upper-mid";
  if (mu > d) return "lower-mid";
  if (mu > -d) return "center";
  return "negative";
}

double oseen_envelope(double alpha, double lambda, double C) {
  const double a = std::abs(alpha);
  if (a < 1.0) throw InvalidArgument("envelope requires |alpha| >= 1");
  const double mu = lambda / alpha;
  const double d = 1.0 / std::sqrt(a);
  const double c = 1.0 / std::cbrt(a);
  const double a23 = std::pow(a, 2.0 / 3.0);
  if (mu > 1.0 + d) return C / (a * (mu - 1.0));
  if (mu > 1.0 - d) return C * d;
  if (mu > 0.5) return C / (a23 * std::cbrt(1.0 - std::abs(mu)));
  if (mu > c) return C / (a23 * mu);
  if (mu > d) return C * mu;
  if (mu > -d) return C * d;
  return C / std::abs(lambda);
}

std::vector<double> oseen_seams(double alpha) {
  const double a = std::abs(alpha);
  const double d = 1.0 / std::sqrt(a);
  return {-d, d, 1.0 / std::cbrt(a), 0.5, 1.0 - d, 1.0 + d};
}

// ---------------------------------------------------------------------------
// sweeps

namespace {

class Evaluator {
 public:
  explicit Evaluator(const ResolventProblem& p) : p_(p) {}

  double key(double mu) const { return p_.even() ? std::abs(mu) : mu; }

  /// Evaluates every not-yet-cached mu in parallel.
  void batch(const std::vector<double>& mus) {
    std::vector<double> todo;
    for (double m : mus) {
      const double k = key(m);
      if (!cache_.count(k) && std::find(todo.begin(), todo.end(), k) == todo.end()) todo.push_back(k);
    }
    auto vals = parallel_map(todo.size(), [&](std::size_t i) { return p_.norm(todo[i] * p_.mu_scale()); });
    for (std::size_t i = 0; i < todo.size(); ++i) cache_[todo[i]] = vals[i];
  }

  double operator()(double mu) {
    const double k = key(mu);
    auto it = cache_.find(k);
    if (it != cache_.end()) return it->second;
    const double v = p_.norm(k * p_.mu_scale());
    cache_[k] = v;
    return v;
  }

 private:
  const ResolventProblem& p_;
  std::map<double, double> cache_;
};

ResolventSample make_sample(const ResolventProblem& p, double mu, double norm) {
  ResolventSample s;
  s.mu = mu;
  s.lambda = mu * p.mu_scale();
  s.norm = norm;
  if (std::abs(p.mu_scale()) >= 1.0) {
    s.regime = p.model() == Model::kolmogorov ? kolmogorov_regime(p.mu_scale(), mu) : oseen_regime(p.alpha(), mu);
  } else {
    s.regime = "none";
  }
  return s;
}

// Golden-section maximization on [a, b]; every evaluated point is recorded.
void golden_max(Evaluator& f, double a, double b, double tol, std::vector<double>& visited) {
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = b - g * (b - a);
  double x2 = a + g * (b - a);
  double f1 = f(x1), f2 = f(x2);
  visited.push_back(x1);
  visited.push_back(x2);
  while (b - a > tol) {
    if (f1 >= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - g * (b - a);
      f1 = f(x1);
      visited.push_back(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + g * (b - a);
      f2 = f(x2);
      visited.push_back(x2);
    }
  }
}

}  // namespace

SweepResult sweep(const ResolventProblem& problem, const std::vector<double>& mus_in) {
  if (mus_in.empty()) throw EmptyData("sweep needs at least one mu");
  std::vector<double> mus = mus_in;
  std::sort(mus.begin(), mus.end());
  mus.erase(std::unique(mus.begin(), mus.end()), mus.end());
  Evaluator f(problem);
  f.batch(mus);
  SweepResult r;
  r.model = problem.model();
  r.alpha = problem.alpha();
  r.l = problem.l();
  r.dim = problem.dim();
  double best = -1.0;
  for (double m : mus) {
    r.samples.push_back(make_sample(problem, m, f(m)));
    if (r.samples.back().norm > best) {
      best = r.samples.back().norm;
      r.argmax_mu = m;
    }
  }
  r.psi = 1.0 / best;
  r.psi_history.push_back(r.psi);
  return r;
}

SweepResult pseudo_bound(const ResolventProblem& problem, const SweepOptions& opt) {
  if (opt.coarse_points < 64) throw InvalidArgument("pseudo_bound needs at least 64 coarse points");
  if (!(opt.mu_max > opt.mu_min)) throw InvalidArgument("empty mu window");
  const int n = opt.coarse_points;
  const bool symmetric = problem.even() && opt.mu_min == -opt.mu_max;
  std::vector<double> mus;
  for (int i = 0; i < n; ++i) {
    if (symmetric) {
      mus.push_back(opt.mu_max * (2.0 * i - (n - 1)) / (n - 1));
    } else {
      mus.push_back(opt.mu_min + (opt.mu_max - opt.mu_min) * i / (n - 1));
    }
  }
  for (double m : opt.extra_mu) {
    if (m >= opt.mu_min && m <= opt.mu_max) {
      mus.push_back(m);
      if (symmetric) mus.push_back(-m);
    }
  }
  Evaluator f(problem);
  f.batch(mus);

  auto psi_of = [&](const std::vector<double>& set, double* arg) {
    double best = -1.0;
    for (double m : set) {
      const double v = f(m);
      if (v > best) {
        best = v;
        *arg = m;
      }
    }
    return 1.0 / best;
  };

  SweepResult r;
  r.model = problem.model();
  r.alpha = problem.alpha();
  r.l = problem.l();
  r.dim = problem.dim();
  r.coarse_spacing = (opt.mu_max - opt.mu_min) / (n - 1);

  auto sorted_unique = [](std::vector<double>& v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
  };
  sorted_unique(mus);
  double arg = 0.0;
  double psi = psi_of(mus, &arg);
  r.psi_history.push_back(psi);

  for (int round = 1; round <= opt.max_rounds; ++round) {
    // Local maxima, largest first.
    std::vector<std::size_t> peaks;
    for (std::size_t i = 0; i < mus.size(); ++i) {
      if (symmetric && mus[i] < 0.0) continue;
      const double v = f(mus[i]);
      const bool left = i == 0 || v >= f(mus[i - 1]);
      const bool right = i + 1 == mus.size() || v >= f(mus[i + 1]);
      if (left && right) peaks.push_back(i);
    }
    std::stable_sort(peaks.begin(), peaks.end(), [&](std::size_t a, std::size_t b) { return f(mus[a]) > f(mus[b]); });
    if (peaks.size() > static_cast<std::size_t>(opt.maxima)) peaks.resize(opt.maxima);

    std::vector<double> visited;
    for (std::size_t i : peaks) {
      const double a = i == 0 ? mus[i] : mus[i - 1];
      const double b = i + 1 == mus.size() ? mus[i] : mus[i + 1];
      if (b - a <= opt.golden_tol) continue;
      golden_max(f, a, b, opt.golden_tol, visited);
    }
    if (visited.empty()) break;
    for (double m : visited) {
      mus.push_back(m);
      if (symmetric) mus.push_back(-m);
    }
    sorted_unique(mus);
    const double next = psi_of(mus, &arg);
    r.psi_history.push_back(next);
    r.refinement_depth = round;
    const bool done = std::abs(psi - next) <= opt.psi_rel_tol * next;
    psi = next;
    if (done) break;
  }
  for (double m : mus) r.samples.push_back(make_sample(problem, m, f(m)));
  r.psi = psi;
  // Even problems peak at +-mu alike; report the nonnegative one.
  r.argmax_mu = symmetric ? std::abs(arg) : arg;
  return r;
}

// ---------------------------------------------------------------------------
// fits

ExponentFit fit_exponent(const std::vector<std::pair<double, double>>& xy) {
  if (xy.size() < 2) throw DegenerateInput("exponent fit needs at least two points");
  ExponentFit fit;
  for (auto [x, y] : xy) {
    if (!(x > 0.0) || !(y > 0.0)) throw DegenerateInput("exponent fit requires positive coordinates");
    fit.points.emplace_back(std::log(x), std::log(y));
  }
  const double n = static_cast<double>(fit.points.size());
  double mx = 0.0, my = 0.0;
  for (auto [u, v] : fit.points) {
    mx += u;
    my += v;
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (auto [u, v] : fit.points) {
    sxx += (u - mx) * (u - mx);
    sxy += (u - mx) * (v - my);
    syy += (v - my) * (v - my);
  }
  if (sxx == 0.0) throw DegenerateInput("exponent fit needs distinct x values");
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r_squared = syy == 0.0 ? 1.0 : std::clamp(sxy * sxy / (sxx * syy), 0.0, 1.0);
  return fit;
}

EnvelopeReport compare_envelope(const SweepResult& sweep, const std::function<double(double)>& envelope,
                                const std::vector<double>& seams, double seam_width) {
  if (sweep.samples.empty()) throw EmptyData("envelope comparison on an empty sweep");
  std::vector<double> ratios;
  EnvelopeReport rep;
  for (const auto& s : sweep.samples) {
    bool near = false;
    for (double z : seams) near = near || std::abs(s.mu - z) < seam_width;
    if (near) {
      ++rep.excluded;
      continue;
    }
    ratios.push_back(s.norm / envelope(s.lambda));
  }
  if (ratios.empty()) throw EmptyData("every sample was excluded near a seam");
  std::sort(ratios.begin(), ratios.end());
  rep.used = ratios.size();
  rep.ratio_min = ratios.front();
  rep.ratio_max = ratios.back();
  const std::size_t m = ratios.size();
  rep.ratio_median = m % 2 ? ratios[m / 2] : 0.5 * (ratios[m / 2 - 1] + ratios[m / 2]);
  rep.C_fit = rep.ratio_max;
  return rep;
}

}  // namespace pslab
