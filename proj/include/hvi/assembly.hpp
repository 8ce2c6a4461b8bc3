#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <functional>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "hvi/mesh.hpp"

namespace hvi {

using SparseMatrix = Eigen::SparseMatrix<double>;
using Vector = Eigen::VectorXd;

class AssemblyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Data of the heat-conduction problem: internal energy g (nodal), heat flux
/// q (one value per boundary edge, zero off Gamma2), boundary temperature b
/// and heat transfer coefficient alpha.
struct ProblemData {
  Vector g;
  std::vector<double> q;
  double b = 0.0;
  /// Optional Gamma3 nodal boundary datum for the linear problems; when set
  /// it overrides `b` at Gamma3 vertices.
  std::optional<Vector> b_nodal;
  double alpha = 1.0;
};

using ScalarField = std::function<double(double, double)>;

/// Interpolates g at the vertices and evaluates q at the midpoint of every
/// Gamma2 edge.
ProblemData make_problem_data(const Mesh& mesh, const ScalarField& g, const ScalarField& q,
                              double b, double alpha);

/// Constant-data shorthand.
ProblemData make_problem_data(const Mesh& mesh, double g, double q, double b, double alpha);

/// Shape checks (sizes, finiteness, alpha > 0, q only on Gamma2). Throws
/// AssemblyError.
void validate_problem_data(const Mesh& mesh, const ProblemData& data);

/// Sign conditions g <= 0, q >= 0, b >= 0. Returns the violations.
std::vector<std::string> sign_condition_violations(const ProblemData& data);

/// a(u,v) = int grad u . grad v with exact P1 gradients. Throws AssemblyError
/// naming the triangle when one is degenerate.
SparseMatrix assemble_stiffness(const Mesh& mesh);

/// Consistent P1 mass matrix on the domain.
SparseMatrix assemble_mass(const Mesh& mesh);

/// f_v = int g phi_v - int_{Gamma2} q phi_v, exact for P1 g and edgewise
/// constant q.
Vector assemble_load(const Mesh& mesh, const ProblemData& data);

struct BoundaryMass {
  /// Sum over Gamma3 edges of |e|/6 [[2,1],[1,2]] (global numbering).
  SparseMatrix consistent;
  /// Row sums of `consistent`; zero away from Gamma3.
  Vector lumped;
  /// Vertices on at least one Gamma3 edge, ascending.
  std::vector<int> nodes;
  double measure = 0.0;
};

BoundaryMass assemble_boundary_mass(const Mesh& mesh);

enum class Space { V0, K0 };
enum class DofKind { Free, FixedGamma1, FixedGamma3 };

struct DofMap {
  Space space = Space::V0;
  std::vector<DofKind> kind;
  std::vector<int> free;
  std::vector<int> fixed;
  /// Global vertex -> position in `free`, or -1.
  std::vector<int> to_free;

  int num_free() const { return static_cast<int>(free.size()); }
};

DofMap build_dof_map(const Mesh& mesh, Space space);

/// Everything that depends only on the mesh.
struct Discretization {
  Mesh mesh;
  SparseMatrix stiffness;
  SparseMatrix mass;
  BoundaryMass gamma3;
  DofMap v0;
  DofMap k0;
};

Discretization discretize(const Mesh& mesh);

/// Rows/columns `rows` x `cols` of a sparse matrix.
SparseMatrix submatrix(const SparseMatrix& a, const std::vector<int>& rows,
                       const std::vector<int>& cols);

Vector gather(const Vector& v, const std::vector<int>& idx);

/// ||v||_V^2 = v^T (A + M) v.
double norm_V(const Discretization& disc, const Vector& v);
/// ||v||_{V0}^2 = v^T A v.
double seminorm_V0(const Discretization& disc, const Vector& v);
double l2_norm_domain(const Discretization& disc, const Vector& v);
/// L2(Gamma2) norm of an edgewise-constant boundary field.
double l2_norm_gamma2(const Mesh& mesh, const std::vector<double>& edge_values);

struct CoercivityEstimates {
  double m_a = 0.0;
  double gamma_norm = 0.0;
  int iterations = 0;
};

class CoercivityError : public std::runtime_error {
 public:
  CoercivityError(const std::string& what, Vector last_iterate, double last_estimate)
      : std::runtime_error(what), last_iterate(std::move(last_iterate)), last_estimate(last_estimate) {}
  Vector last_iterate;
  double last_estimate;
};

/// Sharp discrete constants over V0:
///   m_a        = min  v^T A v / v^T (A + M) v,
///   gamma_norm = sqrt(max v^T M_G3 v / v^T A v),
/// both by inverse power iteration with a Cholesky factor of A restricted to
/// the free dofs.
CoercivityEstimates estimate_coercivity(const Discretization& disc, double rel_tol = 1e-8,
                                        int max_iters = 10000);
CoercivityEstimates estimate_coercivity(const Mesh& mesh, double rel_tol = 1e-8,
                                        int max_iters = 10000);

/// "row col value" per nonzero, 0-based, column-major order.
void write_coordinate_format(const SparseMatrix& a, std::ostream& out);

}  // namespace hvi
