#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "hvi/cli.hpp"
#include "hvi/expression.hpp"
#include "hvi/verification.hpp"
#include "json.hpp"

namespace hvi {

namespace {

namespace fs = std::filesystem;

// Bad input: unreadable files, invalid config, violated preconditions.
class InputError : public std::runtime_error {
 public:
  InputError(const std::string& kind, const std::string& msg, std::string path = {})
      : std::runtime_error(msg), kind(kind), path(std::move(path)) {}
  std::string kind;
  std::string path;
};

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("io", "cannot write " + path.string(), path.string());
  out << text;
  if (!out) throw InputError("io", "failed writing " + path.string(), path.string());
}

void write_error(const fs::path& out_dir, int code, const std::string& kind, const std::string& message,
                 const std::string& path = {}, const std::vector<ConfigIssue>& issues = {}) {
  nlohmann::json j;
  j["status"] = "error";
  j["exit_code"] = code;
  j["kind"] = kind;
  j["message"] = message;
  if (!path.empty()) j["path"] = path;
  if (!issues.empty()) {
    auto& arr = j["issues"] = nlohmann::json::array();
    for (const auto& i : issues) arr.push_back({{"line", i.line}, {"key", i.key}, {"message", i.message}});
  }
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  std::ofstream out(out_dir / "error.json", std::ios::binary);
  out << j.dump(2) << "\n";
}

ScalarField field(const std::string& text) {
  Expression e = Expression::parse(text);
  return [e](double x, double y) { return e(x, y); };
}

Mesh load_config_mesh(const RunConfig& cfg) {
  if (cfg.mesh_file) {
    std::error_code ec;
    if (!fs::is_regular_file(*cfg.mesh_file, ec)) {
      throw InputError("io", "mesh file not found: " + cfg.mesh_file->string(), cfg.mesh_file->string());
    }
    try {
      return load_mesh_file(*cfg.mesh_file);
    } catch (const std::exception& err) {
      throw InputError("mesh", cfg.mesh_file->string() + ": " + err.what(), cfg.mesh_file->string());
    }
  }
  if (cfg.mesh_n) return generate_unit_square_mesh(*cfg.mesh_n);
  throw InputError("config", "mesh.n or mesh.file is required for this command");
}

ProblemData config_data(const RunConfig& cfg, const Mesh& mesh) {
  ProblemData data = make_problem_data(mesh, field(cfg.g), field(cfg.q), cfg.b, cfg.alpha);
  validate_problem_data(mesh, data);
  return data;
}

PotentialSpec config_potential(const RunConfig& cfg) {
  const double b = cfg.potential_b.value_or(cfg.b);
  if (b != cfg.b) {
    throw InputError("config", "potential.b = " + num(b) + " differs from problem.b = " + num(cfg.b));
  }
  try {
    return PotentialSpec::make(cfg.potential_id, b, cfg.potential_params);
  } catch (const std::invalid_argument& err) {
    throw InputError("config", err.what());
  }
}

std::string solution_csv(const Mesh& mesh, const Vector& u) {
  std::string out = "vertex_id,x,y,u\n";
  for (std::size_t v = 0; v < mesh.num_vertices(); ++v) {
    out += std::to_string(v) + "," + num(mesh.vertices[v].x) + "," + num(mesh.vertices[v].y) + "," +
           num(u[static_cast<Eigen::Index>(v)]) + "\n";
  }
  return out;
}

int run_solve(const RunConfig& cfg, const fs::path& out) {
  const Mesh mesh = load_config_mesh(cfg);
  const Discretization disc = discretize(mesh);
  const ProblemData data = config_data(cfg, mesh);
  SolveReport rep;
  std::string potential = "-";
  if (cfg.solve_kind == "dirichlet") {
    rep = solve_dirichlet(disc, data);
  } else if (cfg.solve_kind == "robin") {
    rep = solve_robin(disc, data);
  } else if (cfg.solve_kind == "robin_lumped") {
    rep = solve_robin(disc, data, BoundaryMassKind::Lumped);
  } else {
    const PotentialSpec p = config_potential(cfg);
    potential = std::string(p.name());
    if (cfg.solve_kind == "vi_convex") {
      if (!p.convex()) throw InputError("config", "solve.kind = vi_convex needs a convex potential");
      rep = solve_vi_convex(disc, data, p, cfg.solver);
    } else {
      rep = solve_hvi(disc, data, p, cfg.solver);
    }
  }
  const bool certified = rep.converged && rep.certificate.within(cfg.solver.tol_interior, cfg.solver.tol_inclusion);
  write_text(out / "solution.csv", solution_csv(mesh, rep.solution.values));
  write_text(out / "mesh.txt", save_mesh(mesh));
  std::string s;
  s += "kind = " + std::string(problem_kind_name(rep.solution.kind)) + "\n";
  s += "potential = " + potential + "\n";
  s += "provenance = " + rep.solution.provenance + "\n";
  s += "converged = " + std::string(rep.converged ? "true" : "false") + "\n";
  s += "iterations = " + std::to_string(rep.iterations) + "\n";
  s += "interior_residual_max = " + num(rep.certificate.interior_residual_max) + "\n";
  s += "gamma3_inclusion_max = " + num(rep.certificate.gamma3_inclusion_max) + "\n";
  s += "certificate_max = " +
       num(std::max(rep.certificate.interior_residual_max, rep.certificate.gamma3_inclusion_max)) + "\n";
  s += "tol_interior = " + num(cfg.solver.tol_interior) + "\n";
  s += "tol_inclusion = " + num(cfg.solver.tol_inclusion) + "\n";
  s += "linear_residual = " + num(rep.linear_residual) + "\n";
  s += "norm_V = " + num(rep.solution.norm_V) + "\n";
  s += "seminorm_V0 = " + num(rep.solution.seminorm_V0) + "\n";
  s += "max_u = " + num(rep.solution.values.size() ? rep.solution.values.maxCoeff() : 0.0) + "\n";
  s += "certified = " + std::string(certified ? "true" : "false") + "\n";
  s += "message = " + rep.message + "\n";
  write_text(out / "certificate.txt", s);
  return certified ? 0 : 1;
}

int run_experiment(const RunConfig& cfg, const fs::path& out) {
  if (cfg.experiment_id.empty()) throw InputError("config", "experiment.id is required for the experiment command");
  ExperimentOptions opts;
  opts.solver = cfg.solver;
  opts.workers = cfg.workers;
  ExperimentReport report;
  const std::string& id = cfg.experiment_id;
  try {
    if (id == "refinement") {
      if (cfg.n_list.empty()) throw InputError("config", "experiment.n_list is required for refinement");
      if (cfg.exact.empty()) throw InputError("config", "experiment.exact is required for refinement");
      RefinementSpec spec;
      spec.g = field(cfg.g);
      spec.q = field(cfg.q);
      spec.b = cfg.b;
      spec.alpha = cfg.alpha;
      spec.exact = field(cfg.exact);
      if (cfg.refinement_problem == "robin") spec.problem = RefinementProblem::Robin;
      if (cfg.refinement_problem == "robin_lumped") spec.problem = RefinementProblem::RobinLumped;
      if (cfg.refinement_problem == "hvi") {
        spec.problem = RefinementProblem::Hemivariational;
        spec.potential = config_potential(cfg);
      }
      report = refinement_study(spec, cfg.n_list, opts);
    } else {
      const Mesh mesh = load_config_mesh(cfg);
      const Discretization disc = discretize(mesh);
      const ProblemData data = config_data(cfg, mesh);
      std::vector<double> alphas = cfg.alphas.empty() ? std::vector<double>{cfg.alpha} : cfg.alphas;
      if (id == "linear_theorem") {
        if (cfg.alphas.empty()) alphas = default_alpha_sweep();
        report = verify_linear_theorem(disc, data, alphas, cfg.target_rel.value_or(1e-3), opts);
      } else {
        const PotentialSpec p = config_potential(cfg);
        if (id == "comparison") {
          report = verify_comparison(disc, data, p, alphas, opts);
        } else if (id == "monotonicity") {
          if (cfg.alpha_pairs.empty()) throw InputError("config", "experiment.alpha_pairs is required");
          report = verify_monotonicity(disc, data, p, cfg.alpha_pairs, cfg.override_hhh, opts);
        } else if (id == "alpha_convergence") {
          report = verify_alpha_convergence(disc, data, p, alphas, cfg.target_rel.value_or(1e-2), opts);
        } else if (id == "continuous_dependence") {
          const auto seq = bump_sequence(disc, data, field(cfg.bump), cfg.levels);
          report = verify_continuous_dependence(disc, data, p, seq, opts);
        } else if (id == "uniqueness") {
          report = verify_uniqueness(disc, data, p, cfg.starts, cfg.solver.seed.value_or(1), opts);
        }
      }
    }
  } catch (const PreconditionError& err) {
    throw InputError("precondition", err.what());
  }
  write_text(out / (id + ".csv"), report.to_csv());
  write_text(out / (id + "_summary.txt"), report.summary());
  return report.pass() ? 0 : 1;
}

int run_check_potential(const RunConfig& cfg, const fs::path& out) {
  const PotentialSpec p = config_potential(cfg);
  const PotentialDescription d = describe_potential(p.name(), p.b(), p.params(), cfg.grid);
  write_text(out / "potential.txt", d.text);
  std::cout << d.text;
  return d.all_pass ? 0 : 1;
}

}  // namespace

int run(const RunConfig& config, Command cmd, const fs::path& out_dir) {
  try {
    if (config.command && *config.command != cmd) {
      throw InputError("config", "config declares command '" + std::string(command_name(*config.command)) +
                                     "' but '" + std::string(command_name(cmd)) + "' was requested");
    }
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw InputError("io", "cannot create output directory " + out_dir.string(), out_dir.string());
    fs::remove(out_dir / "error.json", ec);
    switch (cmd) {
      case Command::Solve: return run_solve(config, out_dir);
      case Command::Experiment: return run_experiment(config, out_dir);
      case Command::CheckPotential: return run_check_potential(config, out_dir);
    }
    return 2;
  } catch (const InputError& err) {
    std::cerr << "error: " << err.what() << "\n";
    write_error(out_dir, 2, err.kind, err.what(), err.path);
    return 2;
  } catch (const std::invalid_argument& err) {
    std::cerr << "error: " << err.what() << "\n";
    write_error(out_dir, 2, "input", err.what());
    return 2;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    write_error(out_dir, 1, "runtime", err.what());
    return 1;
  }
}

int run_file(Command cmd, const fs::path& config_path, const fs::path& out_dir) {
  std::ifstream in(config_path, std::ios::binary);
  if (!in) {
    const std::string msg = "cannot read config file: " + config_path.string();
    std::cerr << "error: " << msg << "\n";
    write_error(out_dir, 2, "io", msg, config_path.string());
    return 2;
  }
  std::ostringstream text;
  text << in.rdbuf();
  RunConfig cfg;
  try {
    cfg = parse_config(text.str(), config_path.parent_path());
  } catch (const ConfigError& err) {
    std::cerr << "error: " << err.what() << "\n";
    write_error(out_dir, 2, "config", err.what(), config_path.string(), err.issues);
    return 2;
  }
  return run(cfg, cmd, out_dir);
}

PotentialDescription describe_potential(std::string_view id, double b, const std::map<std::string, double>& params,
                                        const std::optional<SampleGrid>& grid) {
  const PotentialSpec p = PotentialSpec::make(id, b, params);
  PotentialDescription out;
  std::string& t = out.text;
  char line[256];
  t += "potential = " + std::string(p.name()) + "\n";
  t += "b = " + num(p.b()) + "\n";
  t += "params = " + p.describe_params() + "\n";
  t += "convex = " + std::string(p.convex() ? "true" : "false") + "\n";
  std::string kinks;
  for (double k : p.breakpoints()) kinks += (kinks.empty() ? "" : ",") + num(k);
  t += "breakpoints = " + (kinks.empty() ? std::string("none") : kinks) + "\n\n";

  std::vector<double> rs;
  for (int k = -8; k <= 8; ++k) rs.push_back(p.b() + 0.5 * k);
  for (double k : p.breakpoints()) {
    rs.push_back(k - 1e-9);
    rs.push_back(k);
    rs.push_back(k + 1e-9);
  }
  std::sort(rs.begin(), rs.end());
  rs.erase(std::unique(rs.begin(), rs.end()), rs.end());
  std::snprintf(line, sizeof line, "%24s %24s %24s %24s %24s\n", "r", "j(r)", "dj_lo", "dj_hi", "j0(r;b-r)");
  t += line;
  for (double r : rs) {
    const Interval d = p.subdiff(r);
    std::snprintf(line, sizeof line, "%24.17g %24.17g %24.17g %24.17g %24.17g\n", r, p.value(r), d.lo, d.hi,
                  p.j0(r, p.b() - r));
    t += line;
  }
  t += "\n";

  const SampleGrid g = grid.value_or(default_grid(p));
  auto verdict = [&](const std::string& label, const CheckReport& rep) {
    t += label + " = " + (rep.pass ? "pass" : "fail") + " (" + rep.detail + ")\n";
    out.all_pass = out.all_pass && rep.pass;
  };
  verdict("growth H(j)(c)", check_growth(p, g));
  verdict("sign H(j)(d)", check_sign_condition(p, g));
  verdict("strict (H1)", check_strict_condition(p, g));
  const RelaxedMonotonicity mj = estimate_relaxed_monotonicity(p, g);
  std::snprintf(line, sizeof line, "m_j estimate = %.17g (at r = %.6g, s = %.6g; %zu pairs)\n", mj.m_j, mj.at_r,
                mj.at_s, mj.pairs);
  t += line;
  if (auto declared = p.relaxed_monotonicity()) t += "m_j declared = " + num(*declared) + "\n";
  verdict("HHH", check_hhh(p, g, default_c_grid()));
  t += "all_checks = " + std::string(out.all_pass ? "pass" : "fail") + "\n";
  return out;
}

}  // namespace hvi
