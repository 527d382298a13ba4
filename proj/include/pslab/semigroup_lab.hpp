#pragma once

// Propagator norms ||Q e^{tL} Q|| and ||P e^{tL} Q|| for the Kolmogorov model,
// decay-rate fits, the Dunford-integral cross-check on the shifted contour and
// the conversion to physical units.

#include <cstdint>
#include <optional>
#include <vector>

#include "pslab/linalg.hpp"
#include "pslab/quadrature.hpp"
#include "pslab/spectral_operators.hpp"

namespace pslab {

/// -max Re sigma(Q L Q).
double spectral_gap(const ProjectedOperator& op);

/// Geometric grid of 24 points on [0.1, 10] / sqrt|alpha_tilde|, eight O(1)
/// points and t = 0.
std::vector<double> default_time_grid(double alpha_tilde);

/// Upper pieces (lower ones are their reflections):
///   1: z = s + i(s^3/(a c^3) + a),  -c a^{2/3} <= s <= -c a^{1/2}
///   2: Re z = -c a^{1/2},  a - a^{1/2} <= Im z <= a + a^{1/2}
///   3: Im z = -s/c + a,     s <= -c a^{1/2}
/// with a = |alpha_tilde|.
struct ContourSpec {
  double alpha_tilde = 0.0;
  double c = 0.0;

  /// Real part of the path at height |Im z| = y.
  double real_part_at(double y) const;
  /// True if every eigenvalue lies strictly left of the path.
  bool encloses(const CVec& eigs) const;
  /// The six pieces, the rays cut where e^{t Re z} has dropped by e^{-45}.
  Contour pieces(double t) const;
};

/// c = 0.5 * gap / sqrt|alpha_tilde|.
ContourSpec gap_calibrated_contour(const ProjectedOperator& op, double alpha_tilde);

struct PropagatorTrace {
  std::vector<double> times;
  std::vector<double> q_norms;
  std::vector<double> p_norms;  ///< empty unless |l| = 1
  std::vector<double> b2_energy;
};

struct TraceOptions {
  std::ptrdiff_t dense_cap = 4096;
  std::uint64_t seed = 0xb2;
};

PropagatorTrace trace_propagator(const KolmogorovSpec& spec, const std::vector<double>& times,
                                 const TraceOptions& opt = {});

struct DecayFit {
  double rate = 0.0;
  double prefactor = 0.0;
  double t_min = 0.0;
  double t_max = 0.0;
  double residual = 0.0;
  std::size_t samples = 0;
};

/// Least squares on log q_norm over t >= |alpha_tilde|^{-1/2}, stopping at the
/// first sample below `floor`.
DecayFit fit_decay(const PropagatorTrace& trace, double alpha_tilde, double floor = 1e-12);

/// Max relative deviation between the contour integral and exp(tM) f over
/// random probes f in Y. Throws NearSingular if the path does not clear the
/// spectrum.
double dunford_check(const ProjectedOperator& op, double t, const ContourSpec& contour, int probes,
                     std::uint64_t seed = 7);
/// Same check on a vertical line Re z = x0 (with resolvent subtraction).
double dunford_check_vertical(const ProjectedOperator& op, double t, double x0, int probes,
                              std::uint64_t seed = 7);

struct PhysicalRates {
  double nu = 0.0;
  double a = 0.0;
  int l = 1;
  double rate_physical = 0.0;
  double threshold_time = 0.0;
  double c_dimensionless = 0.0;
};

PhysicalRates physical_rates(const DecayFit& fit, double nu, double a, int l);

/// 2 exp(-(2 l^2 - 1) t / 2).
double short_time_bound(double t, int l);

}  // namespace pslab
