#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "hvi/assembly.hpp"
#include "hvi/potentials.hpp"
#include "hvi/solver.hpp"

namespace hvi {

/// Raised when an experiment's hypotheses do not hold for the given input.
class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct CaseRow {
  int case_id = 0;
  int n = 0;
  double alpha = 0.0;
  std::string potential;
  double err_V = 0.0;
  /// Smallest slack of the nodal inequalities checked on this case
  /// (negative means violated).
  double margin_min = 0.0;
  double certificate_max = 0.0;
  int iterations = 0;
  bool pass = true;
};

struct Claim {
  std::string name;
  bool pass = true;
  double measured = 0.0;
  double threshold = 0.0;
  std::string detail;
  /// Reported but not part of the verdict.
  bool informational = false;
};

struct ExperimentReport {
  std::string id;
  std::vector<std::pair<std::string, std::string>> config;
  std::vector<CaseRow> rows;
  std::vector<Claim> claims;
  std::map<std::string, double> metrics;
  bool in_scope = true;
  std::string scope_note;

  bool pass() const;
  /// case_id,n,alpha,potential,err_V,margin_min,certificate_max,verdict
  std::string to_csv() const;
  /// Config snapshot, claims and metrics as plain text.
  std::string summary() const;
};

struct ExperimentOptions {
  SolverOptions solver;
  /// Cases are distributed over this many threads; rows keep case order.
  int workers = 1;
};

std::vector<double> default_alpha_sweep();

/// Linear problems: u_inf <= b, u_alpha <= b, u_alpha <= u_inf, monotonicity
/// in alpha and ||u_alpha - u_inf||_V -> 0 (below 1e-3 ||u_inf||_V at the
/// largest alpha by default). Requires g <= 0, q >= 0 and a constant b > 0.
ExperimentReport verify_linear_theorem(const Discretization& disc, const ProblemData& data,
                                       const std::vector<double>& alphas = default_alpha_sweep(),
                                       double target_rel = 1e-3, const ExperimentOptions& opts = {});

/// Certified HVI solutions satisfy u_alpha <= b and u_alpha <= u_inf.
ExperimentReport verify_comparison(const Discretization& disc, const ProblemData& data,
                                   const PotentialSpec& p, const std::vector<double>& alphas,
                                   const ExperimentOptions& opts = {});

/// u_{a1} <= u_{a2} for every pair a1 <= a2. Potentials failing check_hhh are
/// refused unless `override_hhh`; such runs are labelled out of scope and
/// their claims become informational.
ExperimentReport verify_monotonicity(const Discretization& disc, const ProblemData& data,
                                     const PotentialSpec& p,
                                     const std::vector<std::pair<double, double>>& alpha_pairs,
                                     bool override_hhh = false, const ExperimentOptions& opts = {});

/// ||u_alpha - u_inf||_V nonincreasing along an increasing sweep, final error
/// below `target_rel` ||u_inf||_V, and the boundary term
///   -sum_i m_i j0(u_alpha,i; u_inf,i - u_alpha,i)
/// bounded by C1/alpha with C1 fitted at the first alpha. Metrics carry the
/// log-log slopes of the error against alpha and against 1 + alpha.
ExperimentReport verify_alpha_convergence(const Discretization& disc, const ProblemData& data,
                                          const PotentialSpec& p, const std::vector<double>& alphas,
                                          double target_rel = 1e-2,
                                          const ExperimentOptions& opts = {});

/// g_k = g + 2^-k bump for each level k.
std::vector<ProblemData> bump_sequence(const Discretization& disc, const ProblemData& data,
                                       const ScalarField& bump, const std::vector<int>& levels);

/// ||u_n - u||_V along a perturbation sequence converging to the base data.
/// Needs a finite m_j; when m_a <= alpha m_j ||gamma||^2 the run only reports
/// existence (certified solves) and the convergence claims become
/// informational.
ExperimentReport verify_continuous_dependence(const Discretization& disc, const ProblemData& data,
                                              const PotentialSpec& p,
                                              const std::vector<ProblemData>& perturbed,
                                              const ExperimentOptions& opts = {});

enum class RefinementProblem { Dirichlet, Robin, RobinLumped, Hemivariational };

struct RefinementSpec {
  ScalarField g;
  ScalarField q;
  double b = 0.0;
  double alpha = 1.0;
  RefinementProblem problem = RefinementProblem::Dirichlet;
  std::optional<PotentialSpec> potential;
  /// Closed-form solution, when known.
  ScalarField exact;
};

/// Errors against the closed form on unit-square meshes of each size. err_V
/// is ||u_h - I_h u||_V; metrics hold the nodal max and L2 errors per n.
/// Affine exact solutions must be reproduced to 1e-9; otherwise the L2 error
/// ratio between n and 2n must be 4 within 25%.
ExperimentReport refinement_study(const RefinementSpec& spec, const std::vector<int>& n_list,
                                  const ExperimentOptions& opts = {});

/// L2(Omega) error of a P1 field against a function, 7-point quadrature.
double l2_error(const Mesh& mesh, const Vector& u, const ScalarField& exact);

struct SmallnessCheck {
  double m_a = 0.0;
  double gamma_norm = 0.0;
  double m_j = 0.0;
  bool m_j_declared = false;
  bool holds = false;
  double margin = 0.0;  // m_a - alpha m_j gamma^2
};

/// Uses the declared m_j when available, the sampled estimate otherwise.
SmallnessCheck check_smallness(const Discretization& disc, const PotentialSpec& p, double alpha);

/// `starts` solves from seeded random initial iterates. Under smallness all
/// must agree within 1e-6 nodal max; otherwise only certification is claimed.
ExperimentReport verify_uniqueness(const Discretization& disc, const ProblemData& data,
                                   const PotentialSpec& p, int starts = 10,
                                   std::uint64_t seed = 1, const ExperimentOptions& opts = {});

}  // namespace hvi
