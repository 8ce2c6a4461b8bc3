#include "hvi/verification.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <limits>
#include <numeric>
#include <thread>

#include "hvi/potential_checks.hpp"

namespace hvi {

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string short_num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

// Runs fn(0..count-1) on up to `workers` threads. The first exception is
// rethrown after all threads join.
template <class Fn>
void parallel_for(int count, int workers, Fn&& fn) {
  workers = std::clamp(workers, 1, std::max(count, 1));
  if (workers == 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::atomic<bool> failed{false};
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&]() {
      for (int i = next++; i < count && !failed; i = next++) {
        try {
          fn(i);
        } catch (...) {
          if (!failed.exchange(true)) error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

void require_signs(const ProblemData& data) {
  const auto issues = sign_condition_violations(data);
  if (issues.empty()) return;
  std::string msg = "data violates the sign conditions:";
  for (const auto& i : issues) msg += " " + i + ";";
  throw PreconditionError(msg);
}

void require_anchor(const ProblemData& data, const PotentialSpec& p) {
  if (p.b() != data.b) {
    throw PreconditionError("potential anchored at b = " + num(p.b()) + " but data has b = " + num(data.b));
  }
}

void require_alphas(const std::vector<double>& alphas) {
  if (alphas.empty()) throw PreconditionError("alpha list is empty");
  for (double a : alphas) {
    if (!(a > 0.0) || !std::isfinite(a)) throw PreconditionError("alpha must be positive, got " + num(a));
  }
}

ProblemData with_alpha(const ProblemData& data, double alpha) {
  ProblemData d = data;
  d.alpha = alpha;
  return d;
}

double max_of(const Vector& v) { return v.size() ? v.maxCoeff() : 0.0; }

// min over vertices of (upper - u); upper may be a scalar or a field.
double min_gap(const Vector& upper, const Vector& u) { return u.size() ? (upper - u).minCoeff() : 0.0; }

double certificate_max(const SolveReport& r) {
  return std::max(r.certificate.interior_residual_max, r.certificate.gamma3_inclusion_max);
}

Claim slack_claim(std::string name, double violation, double slack, std::string detail = {}) {
  Claim c;
  c.name = std::move(name);
  c.measured = violation;
  c.threshold = slack;
  c.pass = violation <= slack;
  c.detail = std::move(detail);
  return c;
}

Claim certified_claim(const std::vector<const SolveReport*>& reports) {
  int bad = 0;
  double worst = 0.0;
  std::string first;
  for (std::size_t k = 0; k < reports.size(); ++k) {
    worst = std::max(worst, certificate_max(*reports[k]));
    if (!reports[k]->converged) {
      if (bad++ == 0) first = "case " + std::to_string(k) + ": " + reports[k]->message;
    }
  }
  Claim c;
  c.name = "all solves certified";
  c.measured = bad;
  c.threshold = 0;
  c.pass = bad == 0;
  c.detail = bad ? std::to_string(bad) + " uncertified; " + first : "max certificate " + short_num(worst);
  return c;
}

// Least-squares slope of log(err) against log(x).
std::optional<double> loglog_slope(const std::vector<double>& x, const std::vector<double>& err) {
  if (x.size() < 2) return std::nullopt;
  std::vector<double> lx, ly;
  for (std::size_t k = 0; k < x.size(); ++k) {
    if (!(err[k] > 0.0)) return std::nullopt;
    lx.push_back(std::log(x[k]));
    ly.push_back(std::log(err[k]));
  }
  const double n = static_cast<double>(lx.size());
  const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / n;
  const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t k = 0; k < lx.size(); ++k) {
    sxy += (lx[k] - mx) * (ly[k] - my);
    sxx += (lx[k] - mx) * (lx[k] - mx);
  }
  if (sxx == 0.0) return std::nullopt;
  return sxy / sxx;
}

void note_data(ExperimentReport& report, const Discretization& disc, const ProblemData& data) {
  report.config.emplace_back("mesh.vertices", std::to_string(disc.mesh.num_vertices()));
  report.config.emplace_back("mesh.n", std::to_string(gamma3_resolution(disc.mesh)));
  report.config.emplace_back("problem.b", num(data.b));
  report.config.emplace_back("problem.alpha", num(data.alpha));
}

void note_solver(ExperimentReport& report, const ExperimentOptions& opts) {
  report.config.emplace_back("solver.tol_interior", num(opts.solver.tol_interior));
  report.config.emplace_back("solver.tol_inclusion", num(opts.solver.tol_inclusion));
  report.config.emplace_back("solver.max_iters", std::to_string(opts.solver.max_iters));
  report.config.emplace_back("solver.damping_init", num(opts.solver.damping_init));
}

std::string join(const std::vector<double>& v) {
  std::string s;
  for (std::size_t k = 0; k < v.size(); ++k) s += (k ? "," : "") + num(v[k]);
  return s;
}

}  // namespace

bool ExperimentReport::pass() const {
  for (const auto& c : claims) {
    if (!c.informational && !c.pass) return false;
  }
  for (const auto& r : rows) {
    if (!r.pass) return false;
  }
  return true;
}

std::string ExperimentReport::to_csv() const {
  std::string out = "case_id,n,alpha,potential,err_V,margin_min,certificate_max,verdict\n";
  for (const auto& r : rows) {
    out += std::to_string(r.case_id) + "," + std::to_string(r.n) + "," + num(r.alpha) + "," + r.potential + "," +
           num(r.err_V) + "," + num(r.margin_min) + "," + num(r.certificate_max) + "," +
           (r.pass ? "pass" : "fail") + "\n";
  }
  return out;
}

std::string ExperimentReport::summary() const {
  std::string out = "experiment = " + id + "\n";
  out += "scope = " + std::string(in_scope ? "in theorem scope" : "outside theorem scope");
  if (!scope_note.empty()) out += " (" + scope_note + ")";
  out += "\n";
  for (const auto& [k, v] : config) out += "config." + k + " = " + v + "\n";
  for (const auto& c : claims) {
    out += "claim " + c.name + " = " + (c.informational ? "info/" : "") + (c.pass ? "pass" : "fail") +
           " measured=" + num(c.measured) + " threshold=" + num(c.threshold);
    if (!c.detail.empty()) out += " (" + c.detail + ")";
    out += "\n";
  }
  for (const auto& [k, v] : metrics) out += "metric." + k + " = " + num(v) + "\n";
  out += "verdict = " + std::string(pass() ? "pass" : "fail") + "\n";
  return out;
}

std::vector<double> default_alpha_sweep() { return {1.0, 1e1, 1e2, 1e3, 1e4}; }

ExperimentReport verify_linear_theorem(const Discretization& disc, const ProblemData& data,
                                       const std::vector<double>& alphas, double target_rel,
                                       const ExperimentOptions& opts) {
  require_signs(data);
  if (data.b_nodal) throw PreconditionError("linear theorem requires a constant b");
  if (!(data.b > 0.0)) throw PreconditionError("linear theorem requires b > 0, got " + num(data.b));
  require_alphas(alphas);

  ExperimentReport report;
  report.id = "linear_theorem";
  note_data(report, disc, data);
  report.config.emplace_back("alphas", join(alphas));
  report.config.emplace_back("target_rel", num(target_rel));

  const SolveReport inf = solve_dirichlet(disc, data);
  const Vector& uinf = inf.solution.values;
  const double norm_inf = norm_V(disc, uinf);
  const Vector bvec = Vector::Constant(uinf.size(), data.b);
  const int n = gamma3_resolution(disc.mesh);

  std::vector<SolveReport> sol(alphas.size());
  parallel_for(static_cast<int>(alphas.size()), opts.workers,
               [&](int k) { sol[k] = solve_robin(disc, with_alpha(data, alphas[k])); });

  double viol_b = 0.0, viol_inf = 0.0;
  for (std::size_t k = 0; k < alphas.size(); ++k) {
    const Vector& u = sol[k].solution.values;
    CaseRow row;
    row.case_id = static_cast<int>(k);
    row.n = n;
    row.alpha = alphas[k];
    row.potential = "linear";
    row.err_V = norm_V(disc, u - uinf);
    row.margin_min = std::min(min_gap(bvec, u), min_gap(uinf, u));
    row.certificate_max = certificate_max(sol[k]);
    row.iterations = sol[k].iterations;
    row.pass = row.margin_min >= -1e-9;
    viol_b = std::max(viol_b, max_of(u - bvec));
    viol_inf = std::max(viol_inf, max_of(u - uinf));
    report.rows.push_back(row);
  }

  std::vector<std::size_t> order(alphas.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return alphas[a] < alphas[b]; });
  double viol_mono = 0.0, increase = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 1; k < order.size(); ++k) {
    const Vector& lo = sol[order[k - 1]].solution.values;
    const Vector& hi = sol[order[k]].solution.values;
    viol_mono = std::max(viol_mono, max_of(lo - hi));
    increase = std::max(increase, report.rows[order[k]].err_V - report.rows[order[k - 1]].err_V);
  }
  const double final_err = report.rows[order.back()].err_V;

  report.claims.push_back(slack_claim("u_inf <= b", max_of(uinf - bvec), 1e-9));
  report.claims.push_back(slack_claim("u_alpha <= b", viol_b, 1e-9));
  report.claims.push_back(slack_claim("u_alpha <= u_inf", viol_inf, 1e-9));
  report.claims.push_back(slack_claim("u_alpha increasing in alpha", viol_mono, 1e-9));
  if (order.size() > 1) {
    report.claims.push_back(slack_claim("error decreasing in alpha", increase, 1e-10));
  }
  report.claims.push_back(slack_claim("final error <= target * ||u_inf||_V", final_err, target_rel * norm_inf,
                                      "alpha = " + short_num(alphas[order.back()])));
  report.metrics["norm_V_u_inf"] = norm_inf;
  report.metrics["final_error"] = final_err;
  return report;
}

ExperimentReport verify_comparison(const Discretization& disc, const ProblemData& data, const PotentialSpec& p,
                                   const std::vector<double>& alphas, const ExperimentOptions& opts) {
  require_signs(data);
  require_anchor(data, p);
  require_alphas(alphas);
  const CheckReport sign = check_sign_condition(p, default_grid(p));
  if (!sign.pass) throw PreconditionError("potential fails the sign condition: " + sign.detail);

  ExperimentReport report;
  report.id = "comparison";
  note_data(report, disc, data);
  note_solver(report, opts);
  report.config.emplace_back("potential", std::string(p.name()) + " " + p.describe_params());
  report.config.emplace_back("alphas", join(alphas));

  const Vector uinf = solve_dirichlet(disc, data).solution.values;
  const Vector bvec = Vector::Constant(uinf.size(), data.b);
  std::vector<SolveReport> sol(alphas.size());
  parallel_for(static_cast<int>(alphas.size()), opts.workers,
               [&](int k) { sol[k] = solve_hvi(disc, with_alpha(data, alphas[k]), p, opts.solver); });

  double viol_b = 0.0, viol_inf = 0.0;
  std::vector<const SolveReport*> all;
  for (std::size_t k = 0; k < alphas.size(); ++k) {
    const Vector& u = sol[k].solution.values;
    all.push_back(&sol[k]);
    CaseRow row;
    row.case_id = static_cast<int>(k);
    row.n = gamma3_resolution(disc.mesh);
    row.alpha = alphas[k];
    row.potential = std::string(p.name());
    row.err_V = norm_V(disc, u - uinf);
    row.margin_min = std::min(min_gap(bvec, u), min_gap(uinf, u));
    row.certificate_max = certificate_max(sol[k]);
    row.iterations = sol[k].iterations;
    row.pass = sol[k].converged && row.margin_min >= -1e-9;
    if (sol[k].converged) {
      viol_b = std::max(viol_b, max_of(u - bvec));
      viol_inf = std::max(viol_inf, max_of(u - uinf));
    }
    report.rows.push_back(row);
  }
  report.claims.push_back(certified_claim(all));
  report.claims.push_back(slack_claim("u_alpha <= b", viol_b, 1e-9));
  report.claims.push_back(slack_claim("u_alpha <= u_inf", viol_inf, 1e-9));
  return report;
}

ExperimentReport verify_monotonicity(const Discretization& disc, const ProblemData& data, const PotentialSpec& p,
                                     const std::vector<std::pair<double, double>>& alpha_pairs, bool override_hhh,
                                     const ExperimentOptions& opts) {
  require_signs(data);
  require_anchor(data, p);
  if (alpha_pairs.empty()) throw PreconditionError("no alpha pairs given");
  std::vector<double> alphas;
  for (auto [a1, a2] : alpha_pairs) {
    require_alphas({a1, a2});
    if (a1 > a2) throw PreconditionError("alpha pair (" + num(a1) + ", " + num(a2) + ") must satisfy a1 <= a2");
    alphas.push_back(a1);
    alphas.push_back(a2);
  }
  std::sort(alphas.begin(), alphas.end());
  alphas.erase(std::unique(alphas.begin(), alphas.end()), alphas.end());

  ExperimentReport report;
  report.id = "monotonicity";
  const CheckReport hhh = check_hhh(p, default_grid(p), default_c_grid());
  if (!hhh.pass) {
    if (!override_hhh) {
      throw PreconditionError("potential '" + std::string(p.name()) + "' fails the monotonicity condition (" +
                              hhh.detail + "); set the override flag to probe it anyway");
    }
    report.in_scope = false;
    report.scope_note = "monotonicity condition fails: " + hhh.detail;
  }
  note_data(report, disc, data);
  note_solver(report, opts);
  report.config.emplace_back("potential", std::string(p.name()) + " " + p.describe_params());
  report.config.emplace_back("override_hhh", override_hhh ? "true" : "false");

  std::vector<SolveReport> sol(alphas.size());
  parallel_for(static_cast<int>(alphas.size()), opts.workers,
               [&](int k) { sol[k] = solve_hvi(disc, with_alpha(data, alphas[k]), p, opts.solver); });
  auto find = [&](double a) -> const SolveReport& {
    return sol[static_cast<std::size_t>(std::lower_bound(alphas.begin(), alphas.end(), a) - alphas.begin())];
  };

  std::vector<const SolveReport*> all;
  for (const auto& s : sol) all.push_back(&s);
  report.claims.push_back(certified_claim(all));
  for (std::size_t k = 0; k < alpha_pairs.size(); ++k) {
    const auto [a1, a2] = alpha_pairs[k];
    const SolveReport& s1 = find(a1);
    const SolveReport& s2 = find(a2);
    const Vector diff = s2.solution.values - s1.solution.values;
    CaseRow row;
    row.case_id = static_cast<int>(k);
    row.n = gamma3_resolution(disc.mesh);
    row.alpha = a2;
    row.potential = std::string(p.name());
    row.err_V = norm_V(disc, diff);
    row.margin_min = diff.size() ? diff.minCoeff() : 0.0;
    row.certificate_max = std::max(certificate_max(s1), certificate_max(s2));
    row.iterations = s1.iterations + s2.iterations;
    const bool ordered = row.margin_min >= -1e-9;
    row.pass = s1.converged && s2.converged && (ordered || !report.in_scope);
    Claim c = slack_claim("u(" + short_num(a1) + ") <= u(" + short_num(a2) + ")", -row.margin_min, 1e-9);
    c.informational = !report.in_scope;
    report.claims.push_back(c);
    report.rows.push_back(row);
  }
  return report;
}

ExperimentReport verify_alpha_convergence(const Discretization& disc, const ProblemData& data,
                                          const PotentialSpec& p, const std::vector<double>& alphas,
                                          double target_rel, const ExperimentOptions& opts) {
  require_signs(data);
  require_anchor(data, p);
  require_alphas(alphas);
  for (std::size_t k = 1; k < alphas.size(); ++k) {
    if (!(alphas[k] > alphas[k - 1])) throw PreconditionError("alpha sweep must be strictly increasing");
  }
  const SampleGrid grid = default_grid(p);
  const CheckReport sign = check_sign_condition(p, grid);
  if (!sign.pass) throw PreconditionError("potential fails the sign condition: " + sign.detail);
  const CheckReport strict = check_strict_condition(p, grid);
  if (!strict.pass) throw PreconditionError("potential fails the strict sign condition: " + strict.detail);

  ExperimentReport report;
  report.id = "alpha_convergence";
  note_data(report, disc, data);
  note_solver(report, opts);
  report.config.emplace_back("potential", std::string(p.name()) + " " + p.describe_params());
  report.config.emplace_back("alphas", join(alphas));
  report.config.emplace_back("target_rel", num(target_rel));

  const Vector uinf = solve_dirichlet(disc, data).solution.values;
  const double norm_inf = norm_V(disc, uinf);
  std::vector<SolveReport> sol(alphas.size());
  parallel_for(static_cast<int>(alphas.size()), opts.workers,
               [&](int k) { sol[k] = solve_hvi(disc, with_alpha(data, alphas[k]), p, opts.solver); });

  std::vector<const SolveReport*> all;
  std::vector<double> err, boundary_term;
  for (std::size_t k = 0; k < alphas.size(); ++k) {
    const Vector& u = sol[k].solution.values;
    all.push_back(&sol[k]);
    double q = 0.0;
    for (int v : disc.gamma3.nodes) q -= disc.gamma3.lumped[v] * p.j0(u[v], uinf[v] - u[v]);
    boundary_term.push_back(q);
    CaseRow row;
    row.case_id = static_cast<int>(k);
    row.n = gamma3_resolution(disc.mesh);
    row.alpha = alphas[k];
    row.potential = std::string(p.name());
    row.err_V = norm_V(disc, u - uinf);
    row.margin_min = min_gap(uinf, u);
    row.certificate_max = certificate_max(sol[k]);
    row.iterations = sol[k].iterations;
    row.pass = sol[k].converged;
    err.push_back(row.err_V);
    report.rows.push_back(row);
  }
  report.claims.push_back(certified_claim(all));
  report.metrics["norm_V_u_inf"] = norm_inf;
  if (alphas.size() < 2) {
    report.metrics["error"] = err.front();
    return report;
  }

  double increase = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 1; k < err.size(); ++k) increase = std::max(increase, err[k] - err[k - 1]);
  report.claims.push_back(slack_claim("error nonincreasing in alpha", increase, 1e-10));
  report.claims.push_back(slack_claim("final error <= target * ||u_inf||_V", err.back(), target_rel * norm_inf,
                                      "alpha = " + short_num(alphas.back())));

  const double c1 = alphas.front() * boundary_term.front();
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 1; k < alphas.size(); ++k) {
    worst = std::max(worst, boundary_term[k] - c1 / alphas[k]);
  }
  report.claims.push_back(slack_claim("boundary term <= C1/alpha", worst, 1e-12, "C1 = " + short_num(c1)));
  report.metrics["C1"] = c1;
  std::vector<double> shifted;
  for (double a : alphas) shifted.push_back(1.0 + a);
  if (auto s = loglog_slope(alphas, err)) report.metrics["slope_vs_alpha"] = *s;
  if (auto s = loglog_slope(shifted, err)) report.metrics["slope_vs_1_plus_alpha"] = *s;
  report.metrics["final_error"] = err.back();
  return report;
}

std::vector<ProblemData> bump_sequence(const Discretization& disc, const ProblemData& data, const ScalarField& bump,
                                       const std::vector<int>& levels) {
  std::vector<ProblemData> out;
  for (int k : levels) {
    ProblemData d = data;
    const double scale = std::ldexp(1.0, -k);
    for (std::size_t v = 0; v < disc.mesh.num_vertices(); ++v) {
      const auto& pt = disc.mesh.vertices[v];
      d.g[static_cast<Eigen::Index>(v)] += scale * bump(pt.x, pt.y);
    }
    out.push_back(std::move(d));
  }
  return out;
}

SmallnessCheck check_smallness(const Discretization& disc, const PotentialSpec& p, double alpha) {
  SmallnessCheck s;
  const CoercivityEstimates est = estimate_coercivity(disc);
  s.m_a = est.m_a;
  s.gamma_norm = est.gamma_norm;
  if (auto mj = p.relaxed_monotonicity()) {
    s.m_j = *mj;
    s.m_j_declared = true;
  } else {
    s.m_j = estimate_relaxed_monotonicity(p, default_grid(p)).m_j;
  }
  s.margin = s.m_a - alpha * s.m_j * s.gamma_norm * s.gamma_norm;
  s.holds = s.margin > 0.0;
  return s;
}

namespace {

void note_smallness(ExperimentReport& report, const SmallnessCheck& s) {
  report.metrics["m_a"] = s.m_a;
  report.metrics["gamma_norm"] = s.gamma_norm;
  report.metrics["m_j"] = s.m_j;
  report.metrics["smallness_margin"] = s.margin;
  if (!s.holds) {
    report.in_scope = false;
    report.scope_note = "smallness m_a > alpha m_j |gamma|^2 violated (margin " + short_num(s.margin) +
                        "); existence only";
  }
}

}  // namespace

ExperimentReport verify_continuous_dependence(const Discretization& disc, const ProblemData& data,
                                              const PotentialSpec& p, const std::vector<ProblemData>& perturbed,
                                              const ExperimentOptions& opts) {
  require_signs(data);
  require_anchor(data, p);
  for (const auto& d : perturbed) {
    require_signs(d);
    if (d.b != data.b || d.alpha != data.alpha) {
      throw PreconditionError("perturbations may only change g and q");
    }
  }

  ExperimentReport report;
  report.id = "continuous_dependence";
  note_data(report, disc, data);
  note_solver(report, opts);
  report.config.emplace_back("potential", std::string(p.name()) + " " + p.describe_params());
  report.config.emplace_back("perturbations", std::to_string(perturbed.size()));
  const SmallnessCheck small = check_smallness(disc, p, data.alpha);
  note_smallness(report, small);

  std::vector<SolveReport> sol(perturbed.size() + 1);
  parallel_for(static_cast<int>(sol.size()), opts.workers, [&](int k) {
    sol[k] = solve_hvi(disc, k == 0 ? data : perturbed[k - 1], p, opts.solver);
  });
  const Vector& u = sol[0].solution.values;

  std::vector<const SolveReport*> all;
  for (const auto& s : sol) all.push_back(&s);
  report.claims.push_back(certified_claim(all));

  std::vector<double> err, size;
  for (std::size_t k = 0; k < perturbed.size(); ++k) {
    const ProblemData& d = perturbed[k];
    std::vector<double> dq(d.q.size());
    for (std::size_t e = 0; e < dq.size(); ++e) dq[e] = d.q[e] - data.q[e];
    size.push_back(l2_norm_domain(disc, d.g - data.g) + l2_norm_gamma2(disc.mesh, dq));
    err.push_back(norm_V(disc, sol[k + 1].solution.values - u));
  }
  const double chat = !size.empty() && size.front() > 0.0 ? err.front() / size.front() : 0.0;
  double increase = -std::numeric_limits<double>::infinity();
  double stability = 0.0;
  for (std::size_t k = 0; k < perturbed.size(); ++k) {
    CaseRow row;
    row.case_id = static_cast<int>(k);
    row.n = gamma3_resolution(disc.mesh);
    row.alpha = data.alpha;
    row.potential = std::string(p.name());
    row.err_V = err[k];
    row.margin_min = chat * size[k] - err[k];
    row.certificate_max = certificate_max(sol[k + 1]);
    row.iterations = sol[k + 1].iterations;
    row.pass = sol[k + 1].converged;
    report.rows.push_back(row);
    if (k > 0) {
      increase = std::max(increase, err[k] - err[k - 1]);
      if (err[k] > 0.0) report.metrics["ratio_" + std::to_string(k)] = err[k - 1] / err[k];
    }
    if (size[k] > 0.0) stability = std::max(stability, err[k] / size[k]);
  }
  if (perturbed.size() > 1) {
    Claim c = slack_claim("error decreasing along the sequence", increase, 1e-10);
    c.informational = !small.holds;
    report.claims.push_back(c);
  }
  Claim c = slack_claim("error <= C_hat * perturbation", stability - chat, 1e-10 + 1e-6 * chat,
                        "C_hat = " + short_num(chat) + " from the first case");
  c.informational = true;
  report.claims.push_back(c);
  report.metrics["C_hat"] = chat;
  return report;
}

double l2_error(const Mesh& mesh, const Vector& u, const ScalarField& exact) {
  // Degree-5 rule: centroid plus two orbits of three points.
  struct QP {
    double l1, l2, l3, w;
  };
  const double a1 = 0.059715871789770, b1 = 0.470142064105115, w1 = 0.132394152788506;
  const double a2 = 0.797426985353087, b2 = 0.101286507323456, w2 = 0.125939180544827;
  const QP rule[7] = {{1.0 / 3, 1.0 / 3, 1.0 / 3, 0.225}, {a1, b1, b1, w1}, {b1, a1, b1, w1}, {b1, b1, a1, w1},
                      {a2, b2, b2, w2}, {b2, a2, b2, w2}, {b2, b2, a2, w2}};
  double total = 0.0;
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const auto& tri = mesh.triangles[t];
    const double area = std::abs(signed_area(mesh, t));
    const auto& p0 = mesh.vertices[tri[0]];
    const auto& p1 = mesh.vertices[tri[1]];
    const auto& p2 = mesh.vertices[tri[2]];
    for (const auto& q : rule) {
      const double x = q.l1 * p0.x + q.l2 * p1.x + q.l3 * p2.x;
      const double y = q.l1 * p0.y + q.l2 * p1.y + q.l3 * p2.y;
      const double uh = q.l1 * u[tri[0]] + q.l2 * u[tri[1]] + q.l3 * u[tri[2]];
      const double e = exact(x, y) - uh;
      total += q.w * area * e * e;
    }
  }
  return std::sqrt(total);
}

namespace {

bool looks_affine(const ScalarField& f) {
  const double c = f(0.0, 0.0);
  const double gx = f(1.0, 0.0) - c;
  const double gy = f(0.0, 1.0) - c;
  const double probe[][2] = {{0.3, 0.7}, {0.5, 0.5}, {0.91, 0.13}, {1.0, 1.0}, {0.25, 0.0}};
  for (const auto& pt : probe) {
    const double lin = c + gx * pt[0] + gy * pt[1];
    if (std::abs(f(pt[0], pt[1]) - lin) > 1e-12 * (1.0 + std::abs(lin))) return false;
  }
  return true;
}

}  // namespace

ExperimentReport refinement_study(const RefinementSpec& spec, const std::vector<int>& n_list,
                                  const ExperimentOptions& opts) {
  if (!spec.exact) throw PreconditionError("refinement study needs a closed-form solution");
  if (n_list.empty()) throw PreconditionError("mesh size list is empty");
  for (std::size_t k = 1; k < n_list.size(); ++k) {
    if (n_list[k] <= n_list[k - 1]) throw PreconditionError("mesh sizes must be increasing");
  }
  if (spec.problem == RefinementProblem::Hemivariational && !spec.potential) {
    throw PreconditionError("hemivariational refinement needs a potential");
  }

  ExperimentReport report;
  report.id = "refinement";
  const char* names[] = {"dirichlet", "robin", "robin_lumped", "hvi"};
  const std::string label =
      spec.potential && spec.problem == RefinementProblem::Hemivariational ? std::string(spec.potential->name())
                                                                           : names[static_cast<int>(spec.problem)];
  report.config.emplace_back("problem", names[static_cast<int>(spec.problem)]);
  report.config.emplace_back("problem.b", num(spec.b));
  report.config.emplace_back("problem.alpha", num(spec.alpha));
  std::string ns;
  for (std::size_t k = 0; k < n_list.size(); ++k) ns += (k ? "," : "") + std::to_string(n_list[k]);
  report.config.emplace_back("n_list", ns);

  const ScalarField zero = [](double, double) { return 0.0; };
  std::vector<CaseRow> rows(n_list.size());
  std::vector<double> nodal(n_list.size()), l2(n_list.size());
  parallel_for(static_cast<int>(n_list.size()), opts.workers, [&](int k) {
    const Mesh mesh = generate_unit_square_mesh(n_list[k]);
    const Discretization disc = discretize(mesh);
    const ProblemData data =
        make_problem_data(mesh, spec.g ? spec.g : zero, spec.q ? spec.q : zero, spec.b, spec.alpha);
    SolveReport sol;
    switch (spec.problem) {
      case RefinementProblem::Dirichlet: sol = solve_dirichlet(disc, data); break;
      case RefinementProblem::Robin: sol = solve_robin(disc, data); break;
      case RefinementProblem::RobinLumped: sol = solve_robin(disc, data, BoundaryMassKind::Lumped); break;
      case RefinementProblem::Hemivariational: sol = solve_hvi(disc, data, *spec.potential, opts.solver); break;
    }
    const Vector& u = sol.solution.values;
    Vector interp(u.size());
    for (Eigen::Index v = 0; v < u.size(); ++v) {
      const auto& pt = mesh.vertices[static_cast<std::size_t>(v)];
      interp[v] = spec.exact(pt.x, pt.y);
    }
    nodal[k] = (u - interp).cwiseAbs().maxCoeff();
    l2[k] = l2_error(mesh, u, spec.exact);
    CaseRow& row = rows[k];
    row.case_id = k;
    row.n = n_list[k];
    row.alpha = spec.alpha;
    row.potential = label;
    row.err_V = norm_V(disc, u - interp);
    row.margin_min = -nodal[k];
    row.certificate_max = certificate_max(sol);
    row.iterations = sol.iterations;
    row.pass = sol.converged;
  });
  report.rows = rows;
  for (std::size_t k = 0; k < n_list.size(); ++k) {
    report.metrics["nodal_max_error_n" + std::to_string(n_list[k])] = nodal[k];
    report.metrics["l2_error_n" + std::to_string(n_list[k])] = l2[k];
  }

  if (looks_affine(spec.exact)) {
    report.claims.push_back(
        slack_claim("affine solution reproduced", *std::max_element(nodal.begin(), nodal.end()), 1e-9));
  } else {
    for (std::size_t k = 1; k < n_list.size(); ++k) {
      if (n_list[k] != 2 * n_list[k - 1] || !(l2[k] > 0.0)) continue;
      const double ratio = l2[k - 1] / l2[k];
      report.metrics["l2_order_n" + std::to_string(n_list[k])] = std::log2(ratio);
      Claim c;
      c.name = "L2 error ratio n=" + std::to_string(n_list[k - 1]) + " -> " + std::to_string(n_list[k]);
      c.measured = ratio;
      c.threshold = 4.0;
      c.pass = std::abs(ratio - 4.0) <= 1.0;
      c.detail = "expected 4 within 25%";
      report.claims.push_back(c);
    }
  }
  return report;
}

ExperimentReport verify_uniqueness(const Discretization& disc, const ProblemData& data, const PotentialSpec& p,
                                   int starts, std::uint64_t seed, const ExperimentOptions& opts) {
  require_anchor(data, p);
  if (starts < 1) throw PreconditionError("need at least one start");

  ExperimentReport report;
  report.id = "uniqueness";
  note_data(report, disc, data);
  note_solver(report, opts);
  report.config.emplace_back("potential", std::string(p.name()) + " " + p.describe_params());
  report.config.emplace_back("starts", std::to_string(starts));
  report.config.emplace_back("seed", std::to_string(seed));
  const SmallnessCheck small = check_smallness(disc, p, data.alpha);
  note_smallness(report, small);

  std::vector<SolveReport> sol(static_cast<std::size_t>(starts));
  parallel_for(starts, opts.workers, [&](int k) {
    SolverOptions o = opts.solver;
    o.initial_guess.reset();
    o.seed = seed + static_cast<std::uint64_t>(k);
    sol[k] = solve_hvi(disc, data, p, o);
  });

  std::vector<const SolveReport*> all;
  double spread = 0.0;
  const Vector& ref = sol[0].solution.values;
  for (int k = 0; k < starts; ++k) {
    all.push_back(&sol[k]);
    const Vector diff = sol[k].solution.values - ref;
    const double dmax = diff.size() ? diff.cwiseAbs().maxCoeff() : 0.0;
    spread = std::max(spread, dmax);
    CaseRow row;
    row.case_id = k;
    row.n = gamma3_resolution(disc.mesh);
    row.alpha = data.alpha;
    row.potential = std::string(p.name());
    row.err_V = norm_V(disc, diff);
    row.margin_min = 1e-6 - dmax;
    row.certificate_max = certificate_max(sol[k]);
    row.iterations = sol[k].iterations;
    row.pass = sol[k].converged;
    report.rows.push_back(row);
  }
  report.claims.push_back(certified_claim(all));
  Claim c = slack_claim("multistart agreement (nodal max)", spread, 1e-6);
  c.informational = !small.holds;
  report.claims.push_back(c);
  return report;
}

}  // namespace hvi
