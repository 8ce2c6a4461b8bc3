#include "hvi/assembly.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>

#include "hvi/linear_solver.hpp"

namespace hvi {

namespace {

using Triplet = Eigen::Triplet<double>;

void check_triangle(const Mesh& mesh, std::size_t t, double area) {
  const auto& tri = mesh.triangles[t];
  double scale = 0.0;
  for (int k = 0; k < 3; ++k) {
    const auto& a = mesh.vertices[tri[k]];
    const auto& b = mesh.vertices[tri[(k + 1) % 3]];
    scale = std::max(scale, (b.x - a.x) * (b.x - a.x) + (b.y - a.y) * (b.y - a.y));
  }
  if (!(area > 1e-14 * scale)) {
    throw AssemblyError("degenerate or inverted triangle " + std::to_string(t) +
                        " (signed area " + std::to_string(area) + ")");
  }
}

}  // namespace

ProblemData make_problem_data(const Mesh& mesh, const ScalarField& g, const ScalarField& q,
                              double b, double alpha) {
  ProblemData data;
  data.g.resize(static_cast<Eigen::Index>(mesh.num_vertices()));
  for (std::size_t v = 0; v < mesh.num_vertices(); ++v) {
    data.g[static_cast<Eigen::Index>(v)] = g(mesh.vertices[v].x, mesh.vertices[v].y);
  }
  data.q.assign(mesh.boundary_edges.size(), 0.0);
  for (std::size_t e = 0; e < mesh.boundary_edges.size(); ++e) {
    const auto& edge = mesh.boundary_edges[e];
    if (edge.tag != BoundaryTag::Gamma2) continue;
    const auto& p = mesh.vertices[edge.v[0]];
    const auto& r = mesh.vertices[edge.v[1]];
    data.q[e] = q(0.5 * (p.x + r.x), 0.5 * (p.y + r.y));
  }
  data.b = b;
  data.alpha = alpha;
  return data;
}

ProblemData make_problem_data(const Mesh& mesh, double g, double q, double b, double alpha) {
  return make_problem_data(
      mesh, [g](double, double) { return g; }, [q](double, double) { return q; }, b, alpha);
}

void validate_problem_data(const Mesh& mesh, const ProblemData& data) {
  if (static_cast<std::size_t>(data.g.size()) != mesh.num_vertices()) {
    throw AssemblyError("g must have one value per vertex (" + std::to_string(mesh.num_vertices()) +
                        "), got " + std::to_string(data.g.size()));
  }
  if (!data.g.allFinite()) throw AssemblyError("g must be finite");
  if (data.q.size() != mesh.boundary_edges.size()) {
    throw AssemblyError("q must have one value per boundary edge (" +
                        std::to_string(mesh.boundary_edges.size()) + "), got " +
                        std::to_string(data.q.size()));
  }
  for (std::size_t e = 0; e < data.q.size(); ++e) {
    if (!std::isfinite(data.q[e])) throw AssemblyError("q must be finite");
    if (data.q[e] != 0.0 && mesh.boundary_edges[e].tag != BoundaryTag::Gamma2) {
      throw AssemblyError("q supplied on boundary edge " + std::to_string(e) + " tagged " +
                          std::string(tag_name(mesh.boundary_edges[e].tag)) +
                          "; flux is only allowed on G2");
    }
  }
  if (!std::isfinite(data.b)) throw AssemblyError("b must be finite");
  if (data.b_nodal && static_cast<std::size_t>(data.b_nodal->size()) != mesh.num_vertices()) {
    throw AssemblyError("nodal b must have one value per vertex");
  }
  if (!(data.alpha > 0.0) || !std::isfinite(data.alpha)) {
    throw AssemblyError("alpha must be positive");
  }
}

std::vector<std::string> sign_condition_violations(const ProblemData& data) {
  std::vector<std::string> out;
  if (data.g.size() > 0 && data.g.maxCoeff() > 0.0) out.push_back("g must be <= 0 in the domain");
  for (double q : data.q) {
    if (q < 0.0) {
      out.push_back("q must be >= 0 on G2");
      break;
    }
  }
  if (data.b < 0.0) out.push_back("b must be >= 0");
  if (data.b_nodal && data.b_nodal->size() > 0 && data.b_nodal->minCoeff() < 0.0) {
    out.push_back("nodal b must be >= 0");
  }
  return out;
}

SparseMatrix assemble_stiffness(const Mesh& mesh) {
  const auto nv = static_cast<Eigen::Index>(mesh.num_vertices());
  std::vector<Triplet> entries;
  entries.reserve(9 * mesh.num_triangles());
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangles[t];
    const double area = signed_area(mesh, t);
    check_triangle(mesh, t, area);
    double bx[3], by[3];
    for (int k = 0; k < 3; ++k) {
      const auto& pj = mesh.vertices[tri[(k + 1) % 3]];
      const auto& pk = mesh.vertices[tri[(k + 2) % 3]];
      bx[k] = pj.y - pk.y;
      by[k] = pk.x - pj.x;
    }
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        entries.emplace_back(tri[i], tri[j], (bx[i] * bx[j] + by[i] * by[j]) / (4.0 * area));
      }
    }
  }
  SparseMatrix a(nv, nv);
  a.setFromTriplets(entries.begin(), entries.end());
  return a;
}

SparseMatrix assemble_mass(const Mesh& mesh) {
  const auto nv = static_cast<Eigen::Index>(mesh.num_vertices());
  std::vector<Triplet> entries;
  entries.reserve(9 * mesh.num_triangles());
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangles[t];
    const double area = signed_area(mesh, t);
    check_triangle(mesh, t, area);
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        entries.emplace_back(tri[i], tri[j], area / 12.0 * (i == j ? 2.0 : 1.0));
      }
    }
  }
  SparseMatrix m(nv, nv);
  m.setFromTriplets(entries.begin(), entries.end());
  return m;
}

Vector assemble_load(const Mesh& mesh, const ProblemData& data) {
  validate_problem_data(mesh, data);
  Vector f = assemble_mass(mesh) * data.g;
  for (std::size_t e = 0; e < mesh.boundary_edges.size(); ++e) {
    if (data.q[e] == 0.0) continue;
    const auto& edge = mesh.boundary_edges[e];
    const double share = 0.5 * data.q[e] * edge_length(mesh, edge);
    f[edge.v[0]] -= share;
    f[edge.v[1]] -= share;
  }
  return f;
}

BoundaryMass assemble_boundary_mass(const Mesh& mesh) {
  const auto nv = static_cast<Eigen::Index>(mesh.num_vertices());
  std::vector<Triplet> entries;
  BoundaryMass out;
  std::vector<char> on_gamma3(mesh.num_vertices(), 0);
  for (const auto& edge : mesh.boundary_edges) {
    if (edge.tag != BoundaryTag::Gamma3) continue;
    const double len = edge_length(mesh, edge);
    out.measure += len;
    const int a = edge.v[0];
    const int b = edge.v[1];
    entries.emplace_back(a, a, len / 3.0);
    entries.emplace_back(b, b, len / 3.0);
    entries.emplace_back(a, b, len / 6.0);
    entries.emplace_back(b, a, len / 6.0);
    on_gamma3[a] = on_gamma3[b] = 1;
  }
  out.consistent.resize(nv, nv);
  out.consistent.setFromTriplets(entries.begin(), entries.end());
  out.lumped = out.consistent * Vector::Ones(nv);
  for (Eigen::Index v = 0; v < nv; ++v) {
    if (on_gamma3[v]) out.nodes.push_back(static_cast<int>(v));
  }
  return out;
}

DofMap build_dof_map(const Mesh& mesh, Space space) {
  DofMap map;
  map.space = space;
  const auto cls = classify_vertices(mesh);
  map.kind.resize(cls.size(), DofKind::Free);
  map.to_free.assign(cls.size(), -1);
  for (std::size_t v = 0; v < cls.size(); ++v) {
    if (cls[v] == VertexClass::Gamma1) {
      map.kind[v] = DofKind::FixedGamma1;
    } else if (space == Space::K0 && cls[v] == VertexClass::Gamma3) {
      map.kind[v] = DofKind::FixedGamma3;
    }
    if (map.kind[v] == DofKind::Free) {
      map.to_free[v] = static_cast<int>(map.free.size());
      map.free.push_back(static_cast<int>(v));
    } else {
      map.fixed.push_back(static_cast<int>(v));
    }
  }
  return map;
}

Discretization discretize(const Mesh& mesh) {
  if (auto issues = validate_mesh(mesh); !issues.empty()) {
    throw MeshValidationError(std::move(issues));
  }
  Discretization d;
  d.mesh = mesh;
  d.stiffness = assemble_stiffness(mesh);
  d.mass = assemble_mass(mesh);
  d.gamma3 = assemble_boundary_mass(mesh);
  d.v0 = build_dof_map(mesh, Space::V0);
  d.k0 = build_dof_map(mesh, Space::K0);
  return d;
}

SparseMatrix submatrix(const SparseMatrix& a, const std::vector<int>& rows,
                       const std::vector<int>& cols) {
  std::vector<int> row_pos(static_cast<std::size_t>(a.rows()), -1);
  std::vector<int> col_pos(static_cast<std::size_t>(a.cols()), -1);
  for (std::size_t i = 0; i < rows.size(); ++i) row_pos[rows[i]] = static_cast<int>(i);
  for (std::size_t j = 0; j < cols.size(); ++j) col_pos[cols[j]] = static_cast<int>(j);
  std::vector<Triplet> entries;
  for (Eigen::Index k = 0; k < a.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(a, k); it; ++it) {
      const int r = row_pos[it.row()];
      const int c = col_pos[it.col()];
      if (r >= 0 && c >= 0) entries.emplace_back(r, c, it.value());
    }
  }
  SparseMatrix out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
  out.setFromTriplets(entries.begin(), entries.end());
  return out;
}

Vector gather(const Vector& v, const std::vector<int>& idx) {
  Vector out(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i) out[static_cast<Eigen::Index>(i)] = v[idx[i]];
  return out;
}

double norm_V(const Discretization& disc, const Vector& v) {
  return std::sqrt(std::max(0.0, v.dot(disc.stiffness * v) + v.dot(disc.mass * v)));
}

double seminorm_V0(const Discretization& disc, const Vector& v) {
  return std::sqrt(std::max(0.0, v.dot(disc.stiffness * v)));
}

double l2_norm_domain(const Discretization& disc, const Vector& v) {
  return std::sqrt(std::max(0.0, v.dot(disc.mass * v)));
}

double l2_norm_gamma2(const Mesh& mesh, const std::vector<double>& edge_values) {
  double sum = 0.0;
  for (std::size_t e = 0; e < edge_values.size() && e < mesh.boundary_edges.size(); ++e) {
    if (mesh.boundary_edges[e].tag != BoundaryTag::Gamma2) continue;
    sum += edge_values[e] * edge_values[e] * edge_length(mesh, mesh.boundary_edges[e]);
  }
  return std::sqrt(sum);
}

namespace {

// Largest eigenvalue of B x = nu A x by inverse power iteration.
double largest_generalized_eigenvalue(const SpdSolver& a_solver, const SparseMatrix& a,
                                      const SparseMatrix& b, double rel_tol, int max_iters,
                                      int& iterations, const char* label) {
  Vector x = Vector::Ones(a.rows());
  double nu = 0.0;
  for (int k = 1; k <= max_iters; ++k) {
    Vector y = a_solver.solve(b * x);
    const double scale = y.norm();
    if (!(scale > 0.0)) {
      throw CoercivityError(std::string(label) + ": iterate vanished", x, nu);
    }
    x = y / scale;
    const double next = x.dot(b * x) / x.dot(a * x);
    iterations = std::max(iterations, k);
    if (k > 1 && std::abs(next - nu) <= rel_tol * std::abs(next)) return next;
    nu = next;
  }
  throw CoercivityError(std::string(label) + ": power iteration did not converge in " +
                            std::to_string(max_iters) + " iterations",
                        x, nu);
}

}  // namespace

CoercivityEstimates estimate_coercivity(const Discretization& disc, double rel_tol, int max_iters) {
  if (disc.v0.num_free() == 0) throw AssemblyError("estimate_coercivity: no free dofs in V0");
  if (disc.gamma3.nodes.empty()) throw AssemblyError("estimate_coercivity: G3 is empty");
  const auto& free = disc.v0.free;
  const SparseMatrix a = submatrix(disc.stiffness, free, free);
  const SparseMatrix m = submatrix(disc.mass, free, free);
  const SparseMatrix mg = submatrix(disc.gamma3.consistent, free, free);
  // Power iterations are cheap at desk scale; the factor is reused.
  SpdSolver solver(a);
  CoercivityEstimates est;
  const double nu_mass = largest_generalized_eigenvalue(solver, a, m, rel_tol, max_iters,
                                                        est.iterations, "m_a");
  const double nu_trace = largest_generalized_eigenvalue(solver, a, mg, rel_tol, max_iters,
                                                         est.iterations, "gamma_norm");
  est.m_a = 1.0 / (1.0 + nu_mass);
  est.gamma_norm = std::sqrt(nu_trace);
  return est;
}

CoercivityEstimates estimate_coercivity(const Mesh& mesh, double rel_tol, int max_iters) {
  return estimate_coercivity(discretize(mesh), rel_tol, max_iters);
}

void write_coordinate_format(const SparseMatrix& a, std::ostream& out) {
  char buf[80];
  for (Eigen::Index k = 0; k < a.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(a, k); it; ++it) {
      std::snprintf(buf, sizeof buf, "%ld %ld %.17g\n", static_cast<long>(it.row()),
                    static_cast<long>(it.col()), it.value());
      out << buf;
    }
  }
}

}  // namespace hvi
