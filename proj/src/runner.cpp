#include "pslab/runner.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <Eigen/Eigenvalues>

#include "pslab/coercivity_lab.hpp"
#include "pslab/csv.hpp"
#include "pslab/errors.hpp"
#include "pslab/matrix_engine.hpp"
#include "pslab/oseen_operators.hpp"
#include "pslab/resolvent_lab.hpp"
#include "pslab/semigroup_lab.hpp"
#include "pslab/spectral_operators.hpp"
#include "pslab/svg.hpp"

#ifndef PSLAB_VERSION
#define PSLAB_VERSION "0.0.0"
#endif

namespace pslab {

namespace fs = std::filesystem;
using nlohmann::json;

std::string toolkit_version() { return PSLAB_VERSION; }

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e)) return 2;
  return 3;
}

namespace {

struct Output {
  Table table;
  json payload = json::object();
  std::optional<std::string> svg;
};

std::string n(double x) { return format_number(x); }
std::string n(long long x) { return format_number(x); }

KolmogorovSpec kspec(const RunConfig& c, double alpha, std::optional<int> cap = std::nullopt) {
  KolmogorovSpec s;
  s.l = c.l;
  s.alpha = alpha;
  s.N = c.modes.value_or(default_modes(alpha, c.l));
  if (cap) s.N = std::min(s.N, *cap);
  s.validate(8);
  return s;
}

SweepOptions sweep_options(const RunConfig& c) {
  SweepOptions o;
  o.mu_min = c.mu_min;
  o.mu_max = c.mu_max;
  o.coarse_points = c.coarse_points;
  o.golden_tol = c.golden_tol;
  o.psi_rel_tol = c.psi_rel_tol;
  if (c.model == Model::oseen) {
    // The Oseen peak sits near mu ~ alpha^{-1/3}; cluster samples there.
    for (int i = 0; i < 24; ++i) o.extra_mu.push_back(1e-3 * std::pow(1e3, i / 23.0));
  }
  return o;
}

ResolventProblem problem_for(const RunConfig& c, double alpha, std::ptrdiff_t& dim_out) {
  if (c.model == Model::kolmogorov) {
    auto p = ResolventProblem::kolmogorov(kspec(c, alpha));
    dim_out = p.dim();
    return p;
  }
  const OseenOperatorSet set = assemble_oseen(make_grid(c.h, c.R));
  auto p = ResolventProblem::oseen(set, alpha);
  dim_out = p.dim();
  return p;
}

json fit_json(const ExponentFit& f) {
  return json{{"slope", f.slope}, {"intercept", f.intercept}, {"r_squared", f.r_squared}};
}

Output run_spectrum(const RunConfig& c) {
  Output o;
  o.table.header = {"alpha", "re", "im"};
  std::vector<std::pair<double, double>> gaps;
  json per = json::array();
  for (double a : c.alphas) {
    CVec ev;
    if (c.model == Model::kolmogorov) {
      const KolmogorovSpec s = kspec(c, a);
      ev = eigenvalues(project(assemble_kolmogorov(s), s.l).reduced).eigenvalues;
    } else {
      const OseenOperatorSet set = assemble_oseen(make_grid(c.h, c.R));
      Eigen::ComplexEigenSolver<CMat> es(restrict_Y(set, set.generator(a)), false);
      if (es.info() != Eigen::Success) throw NoConvergence("complex eigensolver failed");
      ev = es.eigenvalues();
    }
    std::vector<cplx> v(ev.begin(), ev.end());
    std::sort(v.begin(), v.end(), [](cplx x, cplx y) {
      return x.real() != y.real() ? x.real() > y.real() : x.imag() < y.imag();
    });
    for (cplx z : v) o.table.add_row({n(a), n(z.real()), n(z.imag())});
    const double gap = -v.front().real();
    per.push_back({{"alpha", a}, {"gap", gap}, {"dim", ev.size()}});
    if (a > 0 && gap > 0) gaps.emplace_back(a, gap);
  }
  o.payload["spectra"] = per;
  if (gaps.size() >= 2) o.payload["gap_fit"] = fit_json(fit_exponent(gaps));
  return o;
}

Output run_resolvent(const RunConfig& c) {
  Output o;
  o.table.header = {"alpha", "lambda", "mu", "norm", "regime"};
  std::vector<double> mus(c.coarse_points);
  for (int i = 0; i < c.coarse_points; ++i) mus[i] = c.mu_min + (c.mu_max - c.mu_min) * i / (c.coarse_points - 1);
  for (double a : c.alphas) {
    std::ptrdiff_t dim = 0;
    const auto p = problem_for(c, a, dim);
    const SweepResult r = sweep(p, mus);
    for (const auto& s : r.samples) o.table.add_row({n(a), n(s.lambda), n(s.mu), n(s.norm), s.regime});
  }
  return o;
}

Output run_psi_scan(const RunConfig& c) {
  Output o;
  o.table.header = {"alpha", "psi", "argmax_mu", "N_used"};
  std::vector<std::pair<double, double>> pts;
  json per = json::array();
  for (double a : c.alphas) {
    std::ptrdiff_t dim = 0;
    const auto p = problem_for(c, a, dim);
    const SweepResult r = pseudo_bound(p, sweep_options(c));
    const long long used = c.model == Model::kolmogorov ? kspec(c, a).N : static_cast<long long>(dim);
    o.table.add_row({n(a), n(r.psi), n(r.argmax_mu), n(used)});
    per.push_back({{"alpha", a}, {"psi", r.psi}, {"argmax_mu", r.argmax_mu}, {"rounds", r.refinement_depth}});
    pts.emplace_back(std::abs(a), r.psi);
  }
  o.payload["scan"] = per;
  if (pts.size() >= 2) o.payload["exponent_fit"] = fit_json(fit_exponent(pts));
  return o;
}

Output run_envelope(const RunConfig& c) {
  Output o;
  o.table.header = {"alpha", "lambda", "mu", "norm", "envelope", "ratio", "regime"};
  json per = json::array();
  bool first = true;
  for (double a : c.alphas) {
    std::ptrdiff_t dim = 0;
    const auto p = problem_for(c, a, dim);
    const SweepResult r = pseudo_bound(p, sweep_options(c));
    std::function<double(double)> env;
    std::vector<double> seams;
    if (c.model == Model::kolmogorov) {
      env = [a, l = c.l](double lam) { return kolmogorov_envelope(a, l, lam); };
      seams = kolmogorov_seams(a * c.l);
    } else {
      env = [a](double lam) { return oseen_envelope(a, lam); };
      seams = oseen_seams(a);
    }
    const EnvelopeReport rep = compare_envelope(r, env, seams, r.coarse_spacing);
    std::vector<double> envs;
    for (const auto& s : r.samples) {
      const double e = env(s.lambda);
      envs.push_back(e * rep.C_fit);
      o.table.add_row({n(a), n(s.lambda), n(s.mu), n(s.norm), n(e), n(s.norm / e), s.regime});
    }
    per.push_back({{"alpha", a},
                   {"C_fit", rep.C_fit},
                   {"ratio_min", rep.ratio_min},
                   {"ratio_median", rep.ratio_median},
                   {"ratio_max", rep.ratio_max},
                   {"used", rep.used},
                   {"excluded", rep.excluded}});
    if (c.svg && first) {
      FigureStyle st;
      st.title = "resolvent norm vs envelope, alpha = " + format_number(a);
      st.xlabel = "mu";
      st.ylabel = "norm";
      st.log_y = true;
      o.svg = emit_figure(r, envs, st);
      first = false;
    }
  }
  o.payload["envelope"] = per;
  return o;
}

Output run_semigroup(const RunConfig& c) {
  Output o;
  o.table.header = {"alpha", "t", "q_norm", "p_norm", "b2_energy"};
  json per = json::array();
  bool first = true;
  for (double a : c.alphas) {
    const KolmogorovSpec s = kspec(c, a, c.max_semigroup_modes);
    const double at = a * s.l;
    PropagatorTrace tr = trace_propagator(s, default_time_grid(at), TraceOptions{4096, c.seed});
    for (std::size_t i = 0; i < tr.times.size(); ++i) {
      o.table.add_row({n(a), n(tr.times[i]), n(tr.q_norms[i]), tr.p_norms.empty() ? "" : n(tr.p_norms[i]),
                       n(tr.b2_energy[i])});
    }
    json e{{"alpha", a}, {"N", s.N}};
    if (std::abs(at) > 0) {
      const DecayFit fit = fit_decay(tr, at);
      e["decay_fit"] = {{"rate", fit.rate}, {"prefactor", fit.prefactor}, {"t_min", fit.t_min},
                        {"t_max", fit.t_max}, {"residual", fit.residual}, {"samples", fit.samples}};
      const PhysicalRates pr = physical_rates(fit, 1.0 / std::abs(a), a > 0 ? 1.0 : -1.0, s.l);
      e["physical_rates"] = {{"nu", pr.nu}, {"a", pr.a}, {"l", pr.l}, {"rate_physical", pr.rate_physical},
                             {"threshold_time", pr.threshold_time}, {"c", pr.c_dimensionless}};
      const ProjectedOperator op = project(assemble_kolmogorov(s), s.l);
      e["dunford_deviation"] = dunford_check(op, c.dunford_t, gap_calibrated_contour(op, at), c.probes, c.seed);
    }
    per.push_back(e);
    if (c.svg && first) {
      FigureStyle st;
      st.title = "propagator norms, alpha = " + format_number(a);
      st.xlabel = "t";
      st.ylabel = "norm";
      o.svg = emit_figure(tr, st);
      first = false;
    }
  }
  o.payload["semigroup"] = per;
  return o;
}

Output run_coercivity(const RunConfig& c) {
  Output o;
  o.table.header = {"mu", "m", "h1", "lambda_min", "c_emp"};
  GapFunctions gf = c.model == Model::kolmogorov ? GapFunctions::kolmogorov(c.kappa) : GapFunctions::oseen(c.kappa);
  const CoercivityContext ctx =
      c.model == Model::kolmogorov
          ? coercivity_context(KolmogorovSpec{c.l, c.alphas.front(), c.modes.value_or(128)})
          : coercivity_context(assemble_oseen(make_grid(c.h, c.R)));
  const CoercivityReport rep = coercivity_report(ctx, gf, c.mus, c.m);
  for (std::size_t i = 0; i < rep.mu.size(); ++i)
    o.table.add_row({n(rep.mu[i]), n(rep.m), n(rep.h1[i]), n(rep.lambda_min[i]), n(rep.c_emp[i])});
  o.payload["kappa"] = c.kappa;
  o.payload["m0"] = gf.m0;
  return o;
}

Output run_f_compare(const RunConfig& c) {
  Output o;
  o.table.header = {"alpha", "mu", "case", "m1", "m2", "admissible", "closed_form", "grid_inf", "ratio"};
  GapFunctions gf = c.model == Model::kolmogorov ? GapFunctions::kolmogorov(c.kappa) : GapFunctions::oseen(c.kappa);
  double worst = 0.0;
  bool ordered = true;
  for (double a : c.alphas) {
    for (int i = 0; i < c.f_grid; ++i) {
      const double mu = c.mu_min + (c.mu_max - c.mu_min) * i / (c.f_grid - 1);
      const FEvaluation e = f_closed_form(gf, a, mu);
      const double g = f_grid_inf(gf, a, mu, c.grid_decades);
      worst = std::max(worst, e.value / g);
      ordered = ordered && g <= e.value;
      o.table.add_row({n(a), n(mu), n(static_cast<long long>(e.case_id)), n(e.m1), n(e.m2),
                       e.admissible ? "true" : "false", n(e.value), n(g), n(e.value / g)});
    }
  }
  o.payload["max_ratio"] = worst;
  o.payload["grid_below_closed_form"] = ordered;
  return o;
}

json audit_json(const AssumptionAudit& a) {
  return json{{"dim", a.dim},
              {"c0", a.c0},
              {"lambda_bound", a.lambda_bound},
              {"b2_coercivity", a.b2_coercivity},
              {"b3_bound", a.b3_bound},
              {"ker_ran", a.ker_ran}};
}

Output run_audit(const RunConfig& c) {
  Output o;
  o.table.header = {"quantity", "coarse", "fine", "drift"};
  AssumptionAudit lo, hi;
  if (c.model == Model::kolmogorov) {
    const int N = c.modes.value_or(64);
    lo = audit_assumptions(KolmogorovSpec{c.l, 0.0, N});
    hi = audit_assumptions(KolmogorovSpec{c.l, 0.0, 2 * N});
  } else {
    lo = audit_assumptions(assemble_oseen(make_grid(std::min(0.05, 2.0 * c.h), c.R)));
    hi = audit_assumptions(assemble_oseen(make_grid(c.h, c.R)));
  }
  auto row = [&](const char* name, double x, double y) {
    o.table.add_row({name, n(x), n(y), n(std::abs(y - x) / std::max(std::abs(y), 1e-300))});
  };
  row("c0", lo.c0, hi.c0);
  row("lambda_bound", lo.lambda_bound, hi.lambda_bound);
  row("b2_coercivity", lo.b2_coercivity, hi.b2_coercivity);
  row("b3_bound", lo.b3_bound, hi.b3_bound);
  row("ker_ran", lo.ker_ran, hi.ker_ran);
  o.payload["coarse"] = audit_json(lo);
  o.payload["fine"] = audit_json(hi);
  return o;
}

Output dispatch(const RunConfig& c) {
  const std::string& e = c.experiment;
  if (e == "spectrum") return run_spectrum(c);
  if (e == "resolvent") return run_resolvent(c);
  if (e == "psi-scan") return run_psi_scan(c);
  if (e == "envelope") return run_envelope(c);
  if (e == "semigroup") return run_semigroup(c);
  if (e == "coercivity") return run_coercivity(c);
  if (e == "f-compare") return run_f_compare(c);
  if (e == "audit") return run_audit(c);
  throw ConfigError("experiment", "unknown experiment '" + e + "'");
}

class DirLock {
 public:
  explicit DirLock(const fs::path& dir) {
    fs::create_directories(dir);
    const std::string p = (dir / ".lock").string();
    fd_ = ::open(p.c_str(), O_CREAT | O_RDWR, 0644);
    if (fd_ < 0) throw ConfigError("output.dir", "cannot create lock file " + p);
    if (::flock(fd_, LOCK_EX | LOCK_NB) != 0) {
      ::close(fd_);
      throw ConfigError("output.dir", "another run holds " + p);
    }
  }
  ~DirLock() {
    ::flock(fd_, LOCK_UN);
    ::close(fd_);
  }
  DirLock(const DirLock&) = delete;
  DirLock& operator=(const DirLock&) = delete;

 private:
  int fd_ = -1;
};

}  // namespace

ResultRecord run(const RunConfig& config, const RunOptions& opt) {
  validate(config);
  const fs::path out(config.out_dir);
  DirLock lock(out);
  const std::string hash = config_hash(config);
  const fs::path cache = out / ".cache" / hash;
  const fs::path record_path = cache / "record.json";

  ResultRecord rec;
  rec.config_hash = hash;
  rec.version = toolkit_version();

  if (!opt.no_cache && fs::exists(record_path)) {
    const json j = json::parse(read_file(record_path));
    if (j.value("version", "") == rec.version) {
      rec.from_cache = true;
      rec.wall_time = j.value("wall_time", 0.0);
      rec.payload = j.value("payload", json::object());
      for (const auto& name : j.at("files")) {
        const std::string f = name.get<std::string>();
        rec.files[f] = read_file(cache / f);
        write_atomic(out / f, rec.files[f]);
      }
      return rec;
    }
  }

  const auto t0 = std::chrono::steady_clock::now();
  Output res;
  try {
    res = dispatch(config);
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw Error(e.kind(), config.experiment + " run failed: " + e.what());
  }
  rec.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  rec.payload = res.payload;

  const std::string stem = config.experiment;
  if (config.csv) rec.files[stem + ".csv"] = to_csv(res.table);
  if (config.svg && res.svg) rec.files[stem + ".svg"] = *res.svg;
  json report{{"config_hash", hash},
              {"version", rec.version},
              {"wall_time", rec.wall_time},
              {"config", dump_config(config)},
              {"payload", rec.payload}};
  if (config.json) rec.files[stem + ".json"] = report.dump(2) + "\n";

  json names = json::array();
  for (const auto& [name, body] : rec.files) {
    write_atomic(out / name, body);
    write_atomic(cache / name, body);
    names.push_back(name);
  }
  report["files"] = names;
  write_atomic(record_path, report.dump(2) + "\n");
  return rec;
}

}  // namespace pslab
