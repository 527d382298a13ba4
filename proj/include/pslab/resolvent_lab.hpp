#pragma once

// Resolvent norms along the imaginary axis, the pseudospectral bound
// Psi = (sup_lambda ||(i lambda + QLQ)^{-1}||)^{-1}, the theoretical envelopes
// and log-log exponent fits.
//
// Sign convention: norms are of (i lambda + QLQ)^{-1}. For the Kolmogorov model
// this is immaterial (the matrix is real, so the norm is even in lambda); for
// the Oseen model the critical window is 0 < lambda/alpha <= 1.

#include <functional>
#include <string>
#include <vector>

#include "pslab/linalg.hpp"
#include "pslab/matrix_engine.hpp"
#include "pslab/oseen_operators.hpp"
#include "pslab/spectral_operators.hpp"

namespace pslab {

enum class Model { kolmogorov, oseen };

std::string to_string(Model m);

/// Projected generator on Y together with the scale mu = lambda / scale.
class ResolventProblem {
 public:
  static ResolventProblem kolmogorov(const KolmogorovSpec& spec);
  static ResolventProblem oseen(const OseenOperatorSet& set, double alpha);

  /// ||(i lambda + QLQ)^{-1}||.
  double norm(double lambda) const;
  double mu_scale() const { return scale_; }
  Model model() const { return model_; }
  /// Norm is even in lambda.
  bool even() const { return model_ == Model::kolmogorov; }
  double alpha() const { return alpha_; }
  int l() const { return l_; }
  std::ptrdiff_t dim() const;
  const ProjectedOperator& projected() const { return proj_; }
  const CMat& dense() const { return dense_; }
  SigmaOptions sigma_options;

 private:
  Model model_ = Model::kolmogorov;
  double alpha_ = 0.0;
  int l_ = 1;
  double scale_ = 1.0;
  ProjectedOperator proj_;
  CMat dense_;
  CMat hess_;  // Hessenberg form of dense_
};

double resolvent_norm(const ProjectedOperator& op, double lambda, const SigmaOptions& opt = {});
double resolvent_norm(const CMat& projected, double lambda, const SigmaOptions& opt = {});

/// Branch label of Theorem-style envelopes.
std::string kolmogorov_regime(double alpha_tilde, double mu);
std::string oseen_regime(double alpha, double mu);

struct ResolventSample {
  double lambda = 0.0;
  double mu = 0.0;
  double norm = 0.0;
  std::string regime;
};

struct SweepResult {
  Model model = Model::kolmogorov;
  double alpha = 0.0;
  int l = 1;
  std::ptrdiff_t dim = 0;
  std::vector<ResolventSample> samples;  ///< sorted by mu
  double psi = 0.0;
  double argmax_mu = 0.0;
  int refinement_depth = 0;
  /// Psi after each refinement round (index 0 = coarse grid).
  std::vector<double> psi_history;
  double coarse_spacing = 0.0;
};

struct SweepOptions {
  double mu_min = -1.5;
  double mu_max = 1.5;
  int coarse_points = 129;
  /// Additional sample locations in mu (e.g. clustered near a critical value).
  std::vector<double> extra_mu;
  double golden_tol = 1e-4;
  double psi_rel_tol = 1e-3;
  int max_rounds = 8;
  int maxima = 3;
};

SweepResult pseudo_bound(const ResolventProblem& problem, const SweepOptions& opt = {});

/// Evaluates norms on a given mu set (no refinement).
SweepResult sweep(const ResolventProblem& problem, const std::vector<double>& mus);

double kolmogorov_envelope(double alpha, int l, double lambda, double C = 1.0);
double oseen_envelope(double alpha, double lambda, double C = 1.0);
/// Branch seams of the envelopes in mu.
std::vector<double> kolmogorov_seams(double alpha_tilde);
std::vector<double> oseen_seams(double alpha);

struct ExponentFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  std::vector<std::pair<double, double>> points;  ///< (log x, log y)
};

ExponentFit fit_exponent(const std::vector<std::pair<double, double>>& xy);

struct EnvelopeReport {
  double C_fit = 0.0;
  double ratio_min = 0.0;
  double ratio_median = 0.0;
  double ratio_max = 0.0;
  std::size_t used = 0;
  std::size_t excluded = 0;
};

/// measured / envelope(lambda) over the sweep. Samples within `seam_width` of a
/// seam (in mu) are skipped.
EnvelopeReport compare_envelope(const SweepResult& sweep, const std::function<double(double)>& envelope,
                                const std::vector<double>& seams = {}, double seam_width = 0.0);

}  // namespace pslab
