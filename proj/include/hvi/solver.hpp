#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hvi/assembly.hpp"
#include "hvi/potentials.hpp"

namespace hvi {

struct SolverOptions {
  double tol_interior = 1e-9;
  double tol_inclusion = 1e-8;
  int max_iters = 10000;
  double damping_init = 1.0;
  /// When set (and no initial guess is given) the Gamma3 values of the
  /// initial iterate are drawn uniformly from [b - 2, b + 2].
  std::optional<std::uint64_t> seed;
  /// Full nodal initial iterate; Gamma1 entries are ignored.
  std::optional<Vector> initial_guess;
};

enum class ProblemKind { Dirichlet, Robin, RobinLumped, Hemivariational, ConvexVariational };

std::string_view problem_kind_name(ProblemKind kind);

struct Solution {
  Vector values;
  double norm_V = 0.0;
  double seminorm_V0 = 0.0;
  ProblemKind kind = ProblemKind::Dirichlet;
  std::string provenance;
};

/// Residuals of the discrete boundary inclusion
///   (f - A u)_i in alpha m_i dj(u_i)   at free Gamma3 nodes,
///   (A u)_i = f_i                      at the other free nodes.
struct Certificate {
  double interior_residual_max = 0.0;
  double gamma3_inclusion_max = 0.0;
  /// dist(-(Au - f)_i / (alpha m_i), dj(u_i)) per entry of `gamma3_nodes`.
  std::vector<double> node_distance;
  std::vector<int> gamma3_nodes;

  bool within(double tol_interior, double tol_inclusion) const {
    return interior_residual_max <= tol_interior && gamma3_inclusion_max <= tol_inclusion;
  }
};

struct SolveReport {
  Solution solution;
  int iterations = 0;
  double linear_residual = 0.0;
  Certificate certificate;
  bool converged = false;
  std::vector<double> damping_history;
  std::string message;
};

/// u = 0 on Gamma1, u = b on Gamma3, a(u, v) = L(v) for v in K0.
SolveReport solve_dirichlet(const Discretization& disc, const ProblemData& data);
SolveReport solve_dirichlet(const Mesh& mesh, const ProblemData& data);

enum class BoundaryMassKind { Consistent, Lumped };

/// (A + alpha M_G3) u = f + alpha M_G3 b on V0.
SolveReport solve_robin(const Discretization& disc, const ProblemData& data,
                        BoundaryMassKind mass = BoundaryMassKind::Consistent);
SolveReport solve_robin(const Mesh& mesh, const ProblemData& data,
                        BoundaryMassKind mass = BoundaryMassKind::Consistent);

/// Boundary hemivariational inequality with lumped Gamma3 weights, by a
/// damped semismooth fixed-point iteration certified on the inclusion.
///
/// Each iteration linearizes the boundary law node by node:
///  - a node pinned at a breakpoint k of j is held at u_i = k and its
///    multiplier is read off the residual; it is released towards the side
///    the multiplier points to once it leaves dj(k);
///  - on a smooth piece with positive curvature the law is linearized
///    (Newton, Robin-like diagonal term);
///  - otherwise the current slope enters as an explicit source; exactly at a
///    breakpoint the selection is the point of dj(u_i) closest to the
///    previous multiplier (midpoint initially).
/// A smooth node whose update crosses a breakpoint is pinned there. The
/// damping factor is halved when the certificate grows and doubled (capped
/// at 1) when it shrinks.
SolveReport solve_hvi(const Discretization& disc, const ProblemData& data, const PotentialSpec& p,
                      const SolverOptions& opts = {});
SolveReport solve_hvi(const Mesh& mesh, const ProblemData& data, const PotentialSpec& p,
                      const SolverOptions& opts = {});

/// Convex case: minimizes 1/2 a(v,v) - L(v) + alpha sum_i m_i j(v_i) over V0
/// by exact coordinate minimization of the Gamma3 unknowns on the Schur
/// complement (closed-form scalar prox per node).
SolveReport solve_vi_convex(const Discretization& disc, const ProblemData& data,
                            const PotentialSpec& p, const SolverOptions& opts = {});
SolveReport solve_vi_convex(const Mesh& mesh, const ProblemData& data, const PotentialSpec& p,
                            const SolverOptions& opts = {});

Certificate check_certificate(const Discretization& disc, const ProblemData& data,
                              const PotentialSpec& p, const Vector& u);
Certificate check_certificate(const Mesh& mesh, const ProblemData& data, const PotentialSpec& p,
                              const Vector& u);

/// Discrete hemivariational residual a(u,v) + alpha sum_i m_i j0(u_i; v_i) - L(v).
double hemivariational_residual(const Discretization& disc, const Vector& load, double alpha,
                                const PotentialSpec& p, const Vector& u, const Vector& v);

}  // namespace hvi
