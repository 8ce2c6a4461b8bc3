#include "hvi/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "hvi/linear_solver.hpp"

namespace hvi {

std::string_view problem_kind_name(ProblemKind kind) {
  switch (kind) {
    case ProblemKind::Dirichlet: return "dirichlet";
    case ProblemKind::Robin: return "robin";
    case ProblemKind::RobinLumped: return "robin_lumped";
    case ProblemKind::Hemivariational: return "hvi";
    case ProblemKind::ConvexVariational: return "vi_convex";
  }
  return "?";
}

namespace {

Solution make_solution(const Discretization& disc, Vector u, ProblemKind kind, std::string provenance) {
  Solution s;
  s.norm_V = norm_V(disc, u);
  s.seminorm_V0 = seminorm_V0(disc, u);
  s.values = std::move(u);
  s.kind = kind;
  s.provenance = std::move(provenance);
  return s;
}

std::string describe(const ProblemData& data) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "b=%.17g alpha=%.17g", data.b, data.alpha);
  return buf;
}

double max_abs_over(const Vector& r, const std::vector<int>& idx) {
  double m = 0.0;
  for (int i : idx) m = std::max(m, std::abs(r[i]));
  return m;
}

// Free V0 nodes that carry a positive lumped Gamma3 weight.
std::vector<int> inclusion_nodes(const Discretization& disc) {
  std::vector<int> nodes;
  for (int v : disc.gamma3.nodes) {
    if (disc.v0.to_free[v] >= 0 && disc.gamma3.lumped[v] > 0.0) nodes.push_back(v);
  }
  return nodes;
}

void require_anchor(const ProblemData& data, const PotentialSpec& p) {
  if (p.b() != data.b) {
    throw std::invalid_argument("potential is anchored at b = " + std::to_string(p.b()) +
                                " but the problem data has b = " + std::to_string(data.b));
  }
}

}  // namespace

SolveReport solve_dirichlet(const Discretization& disc, const ProblemData& data) {
  const Vector f = assemble_load(disc.mesh, data);
  const auto& dofs = disc.k0;
  const auto nv = static_cast<Eigen::Index>(disc.mesh.num_vertices());
  Vector u = Vector::Zero(nv);
  for (int v : dofs.fixed) {
    if (dofs.kind[v] == DofKind::FixedGamma3) u[v] = data.b_nodal ? (*data.b_nodal)[v] : data.b;
  }
  SolveReport report;
  if (dofs.num_free() > 0) {
    const SparseMatrix aff = submatrix(disc.stiffness, dofs.free, dofs.free);
    const SparseMatrix afc = submatrix(disc.stiffness, dofs.free, dofs.fixed);
    const Vector rhs = gather(f, dofs.free) - afc * gather(u, dofs.fixed);
    SpdSolver solver(aff);
    const Vector uf = solver.solve(rhs);
    report.linear_residual = solver.last_relative_residual();
    for (int k = 0; k < dofs.num_free(); ++k) u[dofs.free[k]] = uf[k];
  }
  const Vector r = disc.stiffness * u - f;
  report.certificate.interior_residual_max = max_abs_over(r, dofs.free);
  report.iterations = 1;
  report.converged = true;
  report.solution = make_solution(disc, std::move(u), ProblemKind::Dirichlet, "dirichlet " + describe(data));
  return report;
}

SolveReport solve_dirichlet(const Mesh& mesh, const ProblemData& data) {
  return solve_dirichlet(discretize(mesh), data);
}

SolveReport solve_robin(const Discretization& disc, const ProblemData& data, BoundaryMassKind mass) {
  const Vector f = assemble_load(disc.mesh, data);
  const auto& dofs = disc.v0;
  const auto nv = static_cast<Eigen::Index>(disc.mesh.num_vertices());
  SparseMatrix mg;
  if (mass == BoundaryMassKind::Consistent) {
    mg = disc.gamma3.consistent;
  } else {
    mg.resize(nv, nv);
    std::vector<Eigen::Triplet<double>> diag;
    for (int v : disc.gamma3.nodes) diag.emplace_back(v, v, disc.gamma3.lumped[v]);
    mg.setFromTriplets(diag.begin(), diag.end());
  }
  const Vector bvec = data.b_nodal ? *data.b_nodal : Vector::Constant(nv, data.b);
  const SparseMatrix system = disc.stiffness + data.alpha * mg;
  const Vector load = f + data.alpha * (mg * bvec);

  Vector u = Vector::Zero(nv);
  SolveReport report;
  if (dofs.num_free() > 0) {
    SpdSolver solver(submatrix(system, dofs.free, dofs.free));
    const Vector uf = solver.solve(gather(load, dofs.free));
    report.linear_residual = solver.last_relative_residual();
    for (int k = 0; k < dofs.num_free(); ++k) u[dofs.free[k]] = uf[k];
  }
  const Vector r = system * u - load;
  report.certificate.interior_residual_max = max_abs_over(r, dofs.free);
  report.iterations = 1;
  report.converged = true;
  const ProblemKind kind = mass == BoundaryMassKind::Consistent ? ProblemKind::Robin : ProblemKind::RobinLumped;
  report.solution = make_solution(disc, std::move(u), kind, std::string(problem_kind_name(kind)) + " " + describe(data));
  return report;
}

SolveReport solve_robin(const Mesh& mesh, const ProblemData& data, BoundaryMassKind mass) {
  return solve_robin(discretize(mesh), data, mass);
}

namespace {

Certificate certificate_from_load(const Discretization& disc, const Vector& f, double alpha,
                                  const PotentialSpec& p, const Vector& u) {
  Certificate cert;
  const Vector r = disc.stiffness * u - f;
  cert.gamma3_nodes = inclusion_nodes(disc);
  std::vector<char> is_g3(disc.mesh.num_vertices(), 0);
  for (int v : cert.gamma3_nodes) is_g3[v] = 1;
  for (int v : disc.v0.free) {
    if (!is_g3[v]) cert.interior_residual_max = std::max(cert.interior_residual_max, std::abs(r[v]));
  }
  cert.node_distance.reserve(cert.gamma3_nodes.size());
  for (int v : cert.gamma3_nodes) {
    const double eta = -r[v] / (alpha * disc.gamma3.lumped[v]);
    const double dist = p.subdiff(u[v]).distance(eta);
    cert.node_distance.push_back(dist);
    cert.gamma3_inclusion_max = std::max(cert.gamma3_inclusion_max, dist);
  }
  return cert;
}

Vector initial_iterate(const Discretization& disc, const ProblemData& data, const SolverOptions& opts,
                       const std::vector<int>& g3) {
  const auto nv = static_cast<Eigen::Index>(disc.mesh.num_vertices());
  Vector u = Vector::Zero(nv);
  if (opts.initial_guess) {
    if (opts.initial_guess->size() != nv) {
      throw std::invalid_argument("initial guess must have one value per vertex");
    }
    u = *opts.initial_guess;
  } else if (opts.seed) {
    std::mt19937_64 rng(*opts.seed);
    std::uniform_real_distribution<double> offset(-2.0, 2.0);
    for (int v : g3) u[v] = data.b + offset(rng);
  }
  for (int v : disc.v0.fixed) u[v] = 0.0;
  return u;
}

double merit(const Certificate& c, const SolverOptions& opts) {
  return std::max(c.interior_residual_max / opts.tol_interior, c.gamma3_inclusion_max / opts.tol_inclusion);
}

struct NodeState {
  bool pinned = false;
  double kink = 0.0;
  // Side of `kink` the node was released towards; only used while the node
  // sits exactly on that breakpoint.
  std::optional<Side> released;
  double eta_prev = 0.0;
};

// First breakpoint met when moving from `from` to `to` (excluding `from`).
std::optional<double> first_crossed_kink(const PotentialSpec& p, double from, double to) {
  const auto& kinks = p.breakpoints();
  if (to > from) {
    for (double k : kinks) {
      if (k > from && k <= to) return k;
    }
  } else if (to < from) {
    for (auto it = kinks.rbegin(); it != kinks.rend(); ++it) {
      if (*it < from && *it >= to) return *it;
    }
  }
  return std::nullopt;
}

}  // namespace

SolveReport solve_hvi(const Discretization& disc, const ProblemData& data, const PotentialSpec& p,
                      const SolverOptions& opts) {
  require_anchor(data, p);
  const Vector f = assemble_load(disc.mesh, data);
  const auto& free = disc.v0.free;
  const int nf = disc.v0.num_free();
  const std::vector<int> g3 = inclusion_nodes(disc);
  std::vector<int> g3_index(disc.mesh.num_vertices(), -1);
  for (std::size_t k = 0; k < g3.size(); ++k) g3_index[g3[k]] = static_cast<int>(k);
  std::vector<double> weight(g3.size());
  for (std::size_t k = 0; k < g3.size(); ++k) weight[k] = data.alpha * disc.gamma3.lumped[g3[k]];

  Vector u = initial_iterate(disc, data, opts, g3);
  std::vector<NodeState> state(g3.size());
  for (std::size_t k = 0; k < g3.size(); ++k) state[k].eta_prev = p.subdiff(u[g3[k]]).midpoint();

  SolveReport report;
  report.certificate = certificate_from_load(disc, f, data.alpha, p, u);
  if (report.certificate.within(opts.tol_interior, opts.tol_inclusion)) {
    report.converged = true;
    report.message = "initial iterate certified";
    report.solution = make_solution(disc, std::move(u), ProblemKind::Hemivariational, "hvi " + describe(data));
    return report;
  }
  if (nf == 0) {
    report.message = "no free degrees of freedom";
    report.solution = make_solution(disc, std::move(u), ProblemKind::Hemivariational, "hvi " + describe(data));
    return report;
  }

  const SparseMatrix base = submatrix(disc.stiffness, free, free);
  std::optional<SpdSolver> solver;
  double theta = std::clamp(opts.damping_init, 1e-12, 1.0);
  double prev_merit = merit(report.certificate, opts);
  const double release_tol = 0.1 * opts.tol_inclusion;

  for (int it = 1; it <= opts.max_iters; ++it) {
    SparseMatrix system = base;
    Vector rhs = gather(f, free);
    std::vector<int> pinned_local;
    for (std::size_t k = 0; k < g3.size(); ++k) {
      const int v = g3[k];
      const int loc = disc.v0.to_free[v];
      NodeState& s = state[k];
      if (s.pinned) {
        pinned_local.push_back(loc);
        continue;
      }
      const double w = weight[k];
      const double r = u[v];
      const bool at_kink = p.is_breakpoint(r);
      if (at_kink && !s.released) {
        const double eta = p.subdiff(r).clamp(s.eta_prev);
        rhs[loc] -= w * eta;
        s.eta_prev = eta;
        continue;
      }
      const Branch br = p.branch(r, s.released.value_or(Side::Left));
      if (br.curvature > 0.0) {
        system.coeffRef(loc, loc) += w * br.curvature;
        rhs[loc] -= w * (br.slope - br.curvature * r);
      } else {
        rhs[loc] -= w * br.slope;
      }
    }
    // Pinned nodes become identity rows; their values move to the right-hand side.
    for (int loc : pinned_local) {
      const double kink = u[free[loc]];
      for (SparseMatrix::InnerIterator e(system, loc); e; ++e) {
        if (e.row() == loc) continue;
        rhs[e.row()] -= e.value() * kink;
        e.valueRef() = 0.0;
        system.coeffRef(loc, e.row()) = 0.0;
      }
      system.coeffRef(loc, loc) = 1.0;
      rhs[loc] = kink;
    }

    try {
      if (!solver) {
        solver.emplace(system);
      } else {
        solver->refactor(system);
      }
    } catch (const LinearSolveError& err) {
      report.message = std::string("linearized system breakdown: ") + err.what();
      break;
    }
    const Vector cand_free = solver->solve(rhs);
    report.linear_residual = solver->last_relative_residual();
    Vector cand = u;
    for (int k = 0; k < nf; ++k) cand[free[k]] = cand_free[k];

    Vector next = u;
    for (int k = 0; k < nf; ++k) {
      const int v = free[k];
      next[v] = (1.0 - theta) * u[v] + theta * cand[v];
    }
    const Vector resid = disc.stiffness * cand - f;
    for (std::size_t k = 0; k < g3.size(); ++k) {
      const int v = g3[k];
      NodeState& s = state[k];
      if (s.pinned) {
        next[v] = s.kink;
        const double eta = -resid[v] / weight[k];
        const Interval range = p.subdiff(s.kink);
        if (eta > range.hi + release_tol) {
          s.pinned = false;
          s.released = Side::Right;
        } else if (eta < range.lo - release_tol) {
          s.pinned = false;
          s.released = Side::Left;
        }
        s.eta_prev = range.clamp(eta);
        continue;
      }
      std::optional<double> crossed = first_crossed_kink(p, u[v], next[v]);
      if (s.released && u[v] == s.kink) {
        const bool went_back = *s.released == Side::Right ? next[v] < s.kink : next[v] > s.kink;
        if (went_back) crossed = s.kink;
      }
      if (crossed) {
        s.pinned = true;
        s.kink = *crossed;
        s.released.reset();
        next[v] = *crossed;
      } else if (next[v] != s.kink) {
        s.released.reset();
      }
    }
    u = std::move(next);

    report.iterations = it;
    report.damping_history.push_back(theta);
    report.certificate = certificate_from_load(disc, f, data.alpha, p, u);
    const double m = merit(report.certificate, opts);
    if (report.certificate.within(opts.tol_interior, opts.tol_inclusion)) {
      report.converged = true;
      report.message = "certified";
      break;
    }
    theta = m > prev_merit ? 0.5 * theta : std::min(1.0, 2.0 * theta);
    prev_merit = m;
    if (theta < 1e-12) {
      report.message = "damping underflow (diverging iteration)";
      break;
    }
  }
  if (!report.converged && report.message.empty()) {
    report.message = "no certified solution after " + std::to_string(opts.max_iters) + " iterations";
  }
  report.solution = make_solution(disc, std::move(u), ProblemKind::Hemivariational,
                                  "hvi " + std::string(p.name()) + " " + describe(data));
  return report;
}

SolveReport solve_hvi(const Mesh& mesh, const ProblemData& data, const PotentialSpec& p,
                      const SolverOptions& opts) {
  return solve_hvi(discretize(mesh), data, p, opts);
}

SolveReport solve_vi_convex(const Discretization& disc, const ProblemData& data, const PotentialSpec& p,
                            const SolverOptions& opts) {
  if (!p.convex()) {
    throw std::invalid_argument("solve_vi_convex requires a convex potential, got '" + std::string(p.name()) + "'");
  }
  require_anchor(data, p);
  const Vector f = assemble_load(disc.mesh, data);
  const std::vector<int> g3 = inclusion_nodes(disc);
  std::vector<char> is_g3(disc.mesh.num_vertices(), 0);
  for (int v : g3) is_g3[v] = 1;
  std::vector<int> interior;
  for (int v : disc.v0.free) {
    if (!is_g3[v]) interior.push_back(v);
  }
  const int ng = static_cast<int>(g3.size());

  // Schur complement S = A_GG - A_GI A_II^{-1} A_IG and reduced load.
  Eigen::MatrixXd schur = Eigen::MatrixXd(submatrix(disc.stiffness, g3, g3));
  Vector reduced = gather(f, g3);
  std::optional<SpdSolver> interior_solver;
  SparseMatrix a_ig;
  if (!interior.empty()) {
    interior_solver.emplace(submatrix(disc.stiffness, interior, interior));
    a_ig = submatrix(disc.stiffness, interior, g3);
    const Eigen::MatrixXd coupling = Eigen::MatrixXd(a_ig);
    Eigen::MatrixXd z(coupling.rows(), ng);
    for (int k = 0; k < ng; ++k) z.col(k) = interior_solver->solve(coupling.col(k));
    schur -= coupling.transpose() * z;
    reduced -= z.transpose() * gather(f, interior);
  }

  Vector u = initial_iterate(disc, data, opts, g3);
  Vector ug = gather(u, g3);
  std::vector<double> weight(g3.size());
  for (int k = 0; k < ng; ++k) weight[k] = data.alpha * disc.gamma3.lumped[g3[k]];

  auto reconstruct = [&]() {
    for (int k = 0; k < ng; ++k) u[g3[k]] = ug[k];
    if (!interior.empty()) {
      const Vector ui = interior_solver->solve(gather(f, interior) - a_ig * ug);
      for (std::size_t k = 0; k < interior.size(); ++k) u[interior[k]] = ui[static_cast<Eigen::Index>(k)];
    }
  };

  SolveReport report;
  for (int sweep = 1; sweep <= opts.max_iters; ++sweep) {
    for (int k = 0; k < ng; ++k) {
      const double diag = schur(k, k);
      const double z = (reduced[k] - schur.row(k).dot(ug) + diag * ug[k]) / diag;
      ug[k] = p.prox(z, weight[k] / diag);
    }
    report.iterations = sweep;
    const Vector rho = reduced - schur * ug;
    double worst = 0.0;
    for (int k = 0; k < ng; ++k) worst = std::max(worst, p.subdiff(ug[k]).distance(rho[k] / weight[k]));
    if (worst <= 0.5 * opts.tol_inclusion) {
      reconstruct();
      report.certificate = certificate_from_load(disc, f, data.alpha, p, u);
      if (report.certificate.within(opts.tol_interior, opts.tol_inclusion)) {
        report.converged = true;
        report.message = "certified";
        break;
      }
    }
  }
  if (!report.converged) {
    reconstruct();
    report.certificate = certificate_from_load(disc, f, data.alpha, p, u);
    report.message = "no certified solution after " + std::to_string(opts.max_iters) + " sweeps";
  }
  report.linear_residual = interior_solver ? interior_solver->last_relative_residual() : 0.0;
  report.solution = make_solution(disc, std::move(u), ProblemKind::ConvexVariational,
                                  "vi_convex " + std::string(p.name()) + " " + describe(data));
  return report;
}

SolveReport solve_vi_convex(const Mesh& mesh, const ProblemData& data, const PotentialSpec& p,
                            const SolverOptions& opts) {
  return solve_vi_convex(discretize(mesh), data, p, opts);
}

Certificate check_certificate(const Discretization& disc, const ProblemData& data, const PotentialSpec& p,
                              const Vector& u) {
  if (u.size() != static_cast<Eigen::Index>(disc.mesh.num_vertices())) {
    throw std::invalid_argument("candidate field must have one value per vertex");
  }
  for (int v : disc.v0.fixed) {
    if (u[v] != 0.0) {
      throw std::invalid_argument("candidate field must vanish on G1 (vertex " + std::to_string(v) + ")");
    }
  }
  return certificate_from_load(disc, assemble_load(disc.mesh, data), data.alpha, p, u);
}

Certificate check_certificate(const Mesh& mesh, const ProblemData& data, const PotentialSpec& p,
                              const Vector& u) {
  return check_certificate(discretize(mesh), data, p, u);
}

double hemivariational_residual(const Discretization& disc, const Vector& load, double alpha,
                                const PotentialSpec& p, const Vector& u, const Vector& v) {
  double total = v.dot(disc.stiffness * u - load);
  for (int node : disc.gamma3.nodes) {
    total += alpha * disc.gamma3.lumped[node] * p.j0(u[node], v[node]);
  }
  return total;
}

}  // namespace hvi
