// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "hvi/cli.hpp"
#include "hvi/potential_checks.hpp"
#include "hvi/verification.hpp"

using namespace hvi;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// A certified solve, kept for the soundness criterion.
struct CertifiedCase {
  std::string label;
  std::shared_ptr<const Discretization> disc;
  ProblemData data;
  PotentialSpec p;
  Vector u;
};
std::vector<CertifiedCase> g_certified;

bool certified(const SolveReport& r, const SolverOptions& o = {}) {
  return r.converged && r.certificate.within(o.tol_interior, o.tol_inclusion);
}

double max_abs(const Vector& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

// ||v||_V from the assembled matrices.
double v_norm(const Discretization& d, const Vector& v) {
  return std::sqrt(v.dot(d.stiffness * v) + v.dot(d.mass * v));
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

Outcome affine_exactness() {
  Outcome o;
  double worst = 0.0, slowest = 0.0;
  for (int n : {2, 4, 8, 16}) {
    const auto t0 = std::chrono::steady_clock::now();
    const Mesh mesh = generate_unit_square_mesh(n);
    const auto rep = solve_dirichlet(mesh, make_problem_data(mesh, 0.0, 0.0, 1.0, 1.0));
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    double err = 0.0;
    for (std::size_t v = 0; v < mesh.num_vertices(); ++v) {
      err = std::max(err, std::abs(rep.solution.values[static_cast<Eigen::Index>(v)] - mesh.vertices[v].x));
    }
    worst = std::max(worst, err);
    slowest = std::max(slowest, secs);
    o.pass = o.pass && err <= 1e-10 && secs < 1.0;
  }
  o.detail = "max nodal error " + fmt("%.3g", worst) + ", slowest case " + fmt("%.3g", slowest) + " s";
  return o;
}

Outcome robin_closed_form() {
  Outcome o;
  double worst = 0.0, worst_trace = 0.0;
  for (int n : {4, 16}) {
    const Mesh mesh = generate_unit_square_mesh(n);
    const auto classes = classify_vertices(mesh);
    for (double alpha : {1.0, 9.0, 99.0}) {
      const auto rep = solve_robin(mesh, make_problem_data(mesh, 0.0, 0.0, 1.0, alpha));
      const double c = alpha / (1 + alpha);
      for (std::size_t v = 0; v < mesh.num_vertices(); ++v) {
        const double e = std::abs(rep.solution.values[static_cast<Eigen::Index>(v)] - c * mesh.vertices[v].x);
        worst = std::max(worst, e);
        if (classes[v] == VertexClass::Gamma3) {
          worst_trace = std::max(worst_trace, std::abs(rep.solution.values[static_cast<Eigen::Index>(v)] - c));
        }
      }
    }
  }
  o.pass = worst <= 1e-10 && worst_trace <= 1e-10;
  o.detail = "max nodal error " + fmt("%.3g", worst) + ", max trace error " + fmt("%.3g", worst_trace);
  return o;
}

Outcome hvi_robin_equivalence() {
  Outcome o;
  std::mt19937_64 rng(20261018);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  double worst = 0.0;
  auto disc = std::make_shared<const Discretization>(discretize(generate_unit_square_mesh(12)));
  for (int k = 0; k < 5; ++k) {
    const double g0 = 2 * u01(rng), g1 = 2 * u01(rng), q0 = u01(rng), q1 = u01(rng);
    const double b = 0.25 + 2 * u01(rng), alpha = std::pow(10.0, 2 * u01(rng));
    const ProblemData data = make_problem_data(
        disc->mesh, [&](double x, double y) { return -g0 - g1 * x * y; },
        [&](double x, double) { return q0 + q1 * x; }, b, alpha);
    const auto p = PotentialSpec::make("quadratic", b);
    const auto h = solve_hvi(*disc, data, p);
    const auto r = solve_robin(*disc, data, BoundaryMassKind::Lumped);
    const double e = max_abs(h.solution.values - r.solution.values);
    worst = std::max(worst, e);
    o.pass = o.pass && certified(h) && e <= 1e-8;
    if (certified(h)) g_certified.push_back({"quadratic dataset " + std::to_string(k), disc, data, p, h.solution.values});
  }
  o.detail = "max |u_hvi - u_robin_lumped| " + fmt("%.3g", worst) + " over 5 datasets";
  return o;
}

Outcome comparison() {
  Outcome o;
  auto disc = std::make_shared<const Discretization>(discretize(generate_unit_square_mesh(16)));
  const auto p = PotentialSpec::make("exp_quadratic", 1.0);
  double worst_b = -1e300, worst_inf = -1e300;
  for (double alpha : {1.0, 10.0, 100.0}) {
    const ProblemData data = make_problem_data(disc->mesh, -1.0, 0.5, 1.0, alpha);
    const Vector uinf = solve_dirichlet(*disc, data).solution.values;
    const auto h = solve_hvi(*disc, data, p);
    if (!certified(h)) {
      o.pass = false;
      o.detail += "alpha=" + fmt("%g", alpha) + " not certified; ";
      continue;
    }
    g_certified.push_back({"exp_quadratic alpha=" + fmt("%g", alpha), disc, data, p, h.solution.values});
    worst_b = std::max(worst_b, h.solution.values.maxCoeff() - 1.0);
    worst_inf = std::max(worst_inf, (h.solution.values - uinf).maxCoeff());
  }
  o.pass = o.pass && worst_b <= 1e-9 && worst_inf <= 1e-9;
  o.detail += "max(u - b) " + fmt("%.3g", worst_b) + ", max(u - u_inf) " + fmt("%.3g", worst_inf);
  return o;
}

std::vector<double> alpha_errors(const Discretization& disc, const ProblemData& base, const PotentialSpec& p,
                                 const std::vector<double>& alphas, double& norm_inf, bool& all_certified) {
  const Vector uinf = solve_dirichlet(disc, base).solution.values;
  norm_inf = v_norm(disc, uinf);
  all_certified = true;
  std::vector<double> err;
  for (double a : alphas) {
    ProblemData d = base;
    d.alpha = a;
    const auto h = solve_hvi(disc, d, p);
    all_certified = all_certified && certified(h);
    err.push_back(v_norm(disc, h.solution.values - uinf));
  }
  return err;
}

Outcome convergence_rate_quadratic() {
  const std::vector<double> alphas{1.0, 10.0, 100.0, 1000.0};
  const Discretization disc = discretize(generate_unit_square_mesh(8));
  double norm_inf = 0.0;
  bool cert = false;
  const auto err = alpha_errors(disc, make_problem_data(disc.mesh, 0.0, 0.0, 1.0, 1.0),
                                PotentialSpec::make("quadratic", 1.0), alphas, norm_inf, cert);
  const double slope = loglog_slope(alphas, err);
  std::vector<double> shifted;
  for (double a : alphas) shifted.push_back(1 + a);
  const double slope_shifted = loglog_slope(shifted, err);
  Outcome o;
  o.pass = cert && slope >= -1.05 && slope <= -0.95;
  o.detail = "quadratic: slope vs alpha " + fmt("%.4f", slope) + " (required [-1.05, -0.95]); slope vs 1+alpha " +
             fmt("%.4f", slope_shifted);
  return o;
}

Outcome convergence_exp_quadratic() {
  const std::vector<double> alphas{1.0, 10.0, 100.0, 1000.0};
  const Discretization disc = discretize(generate_unit_square_mesh(16));
  double norm_inf = 0.0;
  bool cert = false;
  const auto err = alpha_errors(disc, make_problem_data(disc.mesh, -1.0, 0.5, 1.0, 1.0),
                                PotentialSpec::make("exp_quadratic", 1.0), alphas, norm_inf, cert);
  Outcome o;
  o.pass = cert;
  std::string list;
  for (std::size_t k = 0; k < err.size(); ++k) {
    if (k > 0 && !(err[k] < err[k - 1])) o.pass = false;
    list += (k ? ", " : "") + fmt("%.4g", err[k]);
  }
  o.pass = o.pass && err.back() <= 1e-2 * norm_inf;
  o.detail = "exp_quadratic errors [" + list + "], final/||u_inf||_V " + fmt("%.3g", err.back() / norm_inf);
  return o;
}

Outcome continuous_dependence() {
  Outcome o;
  const double alpha = 0.5;
  const Discretization disc = discretize(generate_unit_square_mesh(16));
  const auto p = PotentialSpec::make("exp_quadratic", 1.0);
  const auto est = estimate_coercivity(disc);
  const double m_j = 1.0;
  const double margin = est.m_a - alpha * m_j * est.gamma_norm * est.gamma_norm;
  const auto bump = [](double x, double y) { return x * (1 - x) * y * (1 - y); };
  const ProblemData base = make_problem_data(disc.mesh, -1.0, 0.5, 1.0, alpha);
  const auto u = solve_hvi(disc, base, p);
  std::vector<double> err;
  bool cert = certified(u);
  for (int k = 0; k <= 4; ++k) {
    const double s = std::ldexp(1.0, -k);
    const ProblemData d =
        make_problem_data(disc.mesh, [&](double x, double y) { return -1.0 + s * bump(x, y); },
                          [](double, double) { return 0.5; }, 1.0, alpha);
    const auto un = solve_hvi(disc, d, p);
    cert = cert && certified(un);
    err.push_back(v_norm(disc, un.solution.values - u.solution.values));
  }
  o.pass = margin > 0.0 && cert;
  std::string ratios;
  for (std::size_t k = 1; k < err.size(); ++k) {
    const double r = err[k - 1] / err[k];
    o.pass = o.pass && r >= 1.5 && r <= 2.5;
    ratios += (k > 1 ? ", " : "") + fmt("%.4f", r);
  }
  o.detail = "smallness margin " + fmt("%.4f", margin) + " (m_a " + fmt("%.4f", est.m_a) + ", |gamma|^2 " +
             fmt("%.4f", est.gamma_norm * est.gamma_norm) + "), error ratios [" + ratios + "]";
  return o;
}

// Piecewise laws transcribed independently of the implementation.
struct ReferenceLaw {
  std::string id;
  std::map<std::string, double> params;
  std::function<Interval(double)> subdiff;
};

Outcome potential_conformance() {
  Outcome o;
  const double b = 1.0;
  const double m1 = -2.0, m2 = 2.0, r0 = 1.0;
  std::vector<ReferenceLaw> laws;
  laws.push_back({"exp_quadratic", {}, [=](double r) {
                    if (r < b) return Interval::point(2 * (r - b));
                    if (r == b) return Interval{0.0, 1.0};
                    return Interval::point(std::exp(-(r - b)));
                  }});
  const double kink = std::sqrt(2.0 / 3.0);
  laws.push_back({"min_quadratics", {}, [=](double r) {
                    const double j1 = 0.5 * (r - b) * (r - b) + 1, j2 = 2 * (r - b) * (r - b);
                    if (r == b - kink || r == b + kink) return Interval::hull(r - b, 4 * (r - b));
                    return Interval::point(j1 < j2 ? r - b : 4 * (r - b));
                  }});
  laws.push_back({"quadratic", {}, [=](double r) { return Interval::point(r - b); }});
  laws.push_back({"truncated_quadratic", {{"m1", m1}, {"m2", m2}, {"r0", r0}}, [=](double r) {
                    if (r < b - r0) return Interval::point(m1);
                    if (r == b - r0) return Interval{m1, -r0};
                    if (r < b + r0) return Interval::point(r - b);
                    if (r == b + r0) return Interval{r0, m2};
                    return Interval::point(m2);
                  }});
  laws.push_back({"abs", {}, [=](double r) {
                    if (r < b) return Interval::point(-1.0);
                    if (r == b) return Interval{-1.0, 1.0};
                    return Interval::point(1.0);
                  }});
  std::size_t checked = 0, mismatches = 0;
  for (const auto& law : laws) {
    const auto p = PotentialSpec::make(law.id, b, law.params);
    std::vector<double> rs;
    for (int i = 0; i < 2001; ++i) rs.push_back(b - 5.0 + 10.0 * i / 2000.0);
    for (double k : p.breakpoints()) rs.push_back(k);
    rs.push_back(b);
    for (double r : rs) {
      const Interval want = law.subdiff(r);
      // j0(r; s) = max over the reference interval of zeta s.
      bool ok = p.subdiff(r) == want;
      for (double s : {b - r, 1.0, -1.0, 0.37}) {
        ok = ok && p.j0(r, s) == std::max(want.lo * s, want.hi * s);
      }
      ++checked;
      if (!ok) {
        ++mismatches;
        if (mismatches <= 3) o.detail += law.id + " differs at r=" + fmt("%.17g", r) + "; ";
      }
    }
  }
  const auto exp_q = PotentialSpec::make("exp_quadratic", b);
  const double mj = estimate_relaxed_monotonicity(exp_q, default_grid(exp_q)).m_j;
  double convex_mj = 0.0;
  for (const auto& law : laws) {
    const auto p = PotentialSpec::make(law.id, b, law.params);
    if (p.convex()) convex_mj = std::max(convex_mj, estimate_relaxed_monotonicity(p, default_grid(p)).m_j);
  }
  o.pass = mismatches == 0 && mj > 0.5 && mj <= 1 + 1e-6 && convex_mj <= 1e-12;
  o.detail += std::to_string(checked) + " points, " + std::to_string(mismatches) + " mismatches; exp_quadratic m_j " +
              fmt("%.9g", mj) + ", max convex m_j " + fmt("%.3g", convex_mj);
  return o;
}

Outcome certificate_soundness() {
  Outcome o;
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double worst = 1e300;
  for (const auto& c : g_certified) {
    const Discretization& d = *c.disc;
    const Vector f = assemble_load(d.mesh, c.data);
    const Vector au = d.stiffness * c.u;
    for (int k = 0; k < 1000; ++k) {
      Vector v = Vector::Zero(c.u.size());
      for (int i : d.v0.free) v[i] = u(rng);
      double value = v.dot(au) - f.dot(v);
      for (int i : d.gamma3.nodes) {
        if (d.v0.to_free[i] < 0) continue;
        value += c.data.alpha * d.gamma3.lumped[i] * c.p.j0(c.u[i], v[i]);
      }
      worst = std::min(worst, value);
    }
  }
  o.pass = !g_certified.empty() && worst >= -1e-7;
  o.detail = std::to_string(g_certified.size()) + " certified solutions x 1000 directions, min residual " +
             fmt("%.3g", worst);
  return o;
}

Outcome uniqueness() {
  Outcome o;
  const Discretization disc = discretize(generate_unit_square_mesh(16));
  const auto est = estimate_coercivity(disc);
  const auto p = PotentialSpec::make("exp_quadratic", 1.0);
  for (double alpha : {0.5, 100.0}) {
    const bool small = est.m_a > alpha * 1.0 * est.gamma_norm * est.gamma_norm;
    const ProblemData data = make_problem_data(disc.mesh, -1.0, 0.5, 1.0, alpha);
    std::vector<Vector> sols;
    bool cert = true;
    for (int s = 1; s <= 10; ++s) {
      SolverOptions opts;
      opts.seed = static_cast<std::uint64_t>(s);
      const auto h = solve_hvi(disc, data, p, opts);
      cert = cert && certified(h, opts);
      sols.push_back(h.solution.values);
    }
    double spread = 0.0;
    for (const auto& s : sols) spread = std::max(spread, max_abs(s - sols.front()));
    o.detail += "alpha=" + fmt("%g", alpha) + (small ? " smallness holds" : " smallness violated") +
                ", certified " + (cert ? "yes" : "no") + ", spread " + fmt("%.3g", spread) + "; ";
    if (alpha == 0.5) o.pass = o.pass && small && cert && spread <= 1e-6;
    if (alpha == 100.0) o.pass = o.pass && !small && cert;
  }
  return o;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome determinism(const fs::path& work) {
  const std::vector<std::pair<std::string, std::string>> configs = {
      {"linear_theorem", "mesh.n = 8\nproblem.g = -1\nproblem.q = 1\nproblem.b = 1\n"},
      {"comparison",
       "mesh.n = 16\nproblem.g = -1\nproblem.q = 0.5\nproblem.b = 1\nproblem.alphas = 1, 10, 100\n"
       "potential.id = exp_quadratic\nexperiment.workers = 3\n"},
      {"monotonicity",
       "mesh.n = 8\nproblem.g = -1\nproblem.q = 0.5\nproblem.b = 1\npotential.id = truncated_quadratic\n"
       "experiment.alpha_pairs = 1:5, 5:50\n"},
      {"alpha_convergence",
       "mesh.n = 8\nproblem.g = -1\nproblem.q = 0.5\nproblem.b = 1\nproblem.alphas = 1, 10, 100, 1000\n"
       "potential.id = exp_quadratic\nexperiment.workers = 2\n"},
      {"continuous_dependence",
       "mesh.n = 8\nproblem.g = -1\nproblem.q = 0.5\nproblem.b = 1\nproblem.alpha = 0.5\n"
       "potential.id = exp_quadratic\n"},
      {"refinement",
       "problem.g = -1\nproblem.b = 1\nexperiment.n_list = 4, 8, 16\nexperiment.exact = 0.5*x^2 + 0.5*x\n"},
      {"uniqueness",
       "mesh.n = 8\nproblem.g = -1\nproblem.q = 0.5\nproblem.b = 1\nproblem.alpha = 0.5\n"
       "potential.id = exp_quadratic\nexperiment.starts = 4\nexperiment.workers = 4\n"},
  };
  Outcome o;
  std::error_code ec;
  fs::remove_all(work, ec);
  for (const auto& [id, body] : configs) {
    const fs::path cfg = work / (id + ".cfg");
    fs::create_directories(work);
    std::ofstream(cfg, std::ios::binary) << "experiment.id = " << id << "\n" << body;
    std::string outputs[2];
    for (int run_no = 0; run_no < 2; ++run_no) {
      const fs::path out = work / (id + "_run" + std::to_string(run_no));
      const int code = run_file(Command::Experiment, cfg, out);
      if (code == 2) o.detail += id + " exited with 2; ";
      outputs[run_no] = slurp(out / (id + ".csv")) + slurp(out / (id + "_summary.txt"));
    }
    if (outputs[0].empty() || outputs[0] != outputs[1]) {
      o.pass = false;
      o.detail += id + " differs; ";
    }
  }
  o.detail += std::to_string(configs.size()) + " experiment configs run twice";
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  const fs::path work = argc > 1 ? fs::path(argv[1]) : fs::temp_directory_path() / "hvi_acceptance";
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"1 affine exactness", affine_exactness},
      {"2 robin closed form", robin_closed_form},
      {"3 hvi/robin equivalence", hvi_robin_equivalence},
      {"4 comparison", comparison},
      {"5a convergence rate (quadratic)", convergence_rate_quadratic},
      {"5b convergence (exp_quadratic)", convergence_exp_quadratic},
      {"6 continuous dependence", continuous_dependence},
      {"7 potential conformance", potential_conformance},
      {"8 certificate soundness", certificate_soundness},
      {"9 uniqueness under smallness", uniqueness},
      {"10 determinism", [&] { return determinism(work); }},
  };
  int failed = 0;
  for (const auto& [name, check] : criteria) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& err) {
      o = {false, std::string("exception: ") + err.what()};
    }
    std::cout << (o.pass ? "PASS" : "FAIL") << "  criterion " << name << ": " << o.detail << std::endl;
    failed += o.pass ? 0 : 1;
  }
  std::cout << (failed ? std::to_string(failed) + " criteria failed" : std::string("all criteria passed")) << "\n";
  return failed ? 1 : 0;
}
