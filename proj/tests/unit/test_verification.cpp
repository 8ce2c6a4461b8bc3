#include <gtest/gtest.h>

#include <cmath>

#include "hvi/verification.hpp"

using namespace hvi;

namespace {

const Claim* find_claim(const ExperimentReport& r, const std::string& prefix) {
  for (const auto& c : r.claims) {
    if (c.name.rfind(prefix, 0) == 0) return &c;
  }
  return nullptr;
}

Discretization square(int n) { return discretize(generate_unit_square_mesh(n)); }

}  // namespace

TEST(LinearTheorem, ClosedFormRatio) {
  const Discretization disc = square(8);
  const auto d = make_problem_data(disc.mesh, 0.0, 0.0, 1.0, 1.0);
  const auto rep = verify_linear_theorem(disc, d, {10.0, 100.0}, 1.0);
  ASSERT_EQ(rep.rows.size(), 2u);
  EXPECT_NEAR(rep.rows[0].err_V / rep.rows[1].err_V, 101.0 / 11.0, 0.05 * 101.0 / 11.0);
  EXPECT_TRUE(rep.pass()) << rep.summary();
}

TEST(LinearTheorem, TraceGapAtNine) {
  const Discretization disc = square(8);
  const auto d = make_problem_data(disc.mesh, 0.0, 0.0, 1.0, 9.0);
  const Vector uinf = solve_dirichlet(disc, d).solution.values;
  const Vector ua = solve_robin(disc, d).solution.values;
  double gap = 0.0;
  for (int v : disc.gamma3.nodes) gap = std::max(gap, uinf[v] - ua[v]);
  EXPECT_NEAR(gap, 0.1, 1e-9);
}

TEST(LinearTheorem, AllClaimsOnSignedData) {
  const Discretization disc = square(8);
  const auto rep = verify_linear_theorem(disc, make_problem_data(disc.mesh, -1.0, 1.0, 1.0, 1.0));
  EXPECT_TRUE(rep.pass()) << rep.summary();
  EXPECT_EQ(rep.rows.size(), 5u);
}

TEST(LinearTheorem, RejectsBadSigns) {
  const Discretization disc = square(4);
  EXPECT_THROW(verify_linear_theorem(disc, make_problem_data(disc.mesh, 1.0, 0.0, 1.0, 1.0)), PreconditionError);
  EXPECT_THROW(verify_linear_theorem(disc, make_problem_data(disc.mesh, 0.0, 0.0, 0.0, 1.0)), PreconditionError);
}

TEST(Comparison, ExpQuadratic) {
  const Discretization disc = square(16);
  const auto d = make_problem_data(disc.mesh, -1.0, 0.5, 1.0, 1.0);
  const auto rep = verify_comparison(disc, d, PotentialSpec::make("exp_quadratic", 1.0), {1.0, 10.0, 100.0});
  EXPECT_TRUE(rep.pass()) << rep.summary();
}

TEST(Comparison, QuadraticAndGate) {
  const Discretization disc = square(8);
  const auto d = make_problem_data(disc.mesh, -1.0, 1.0, 1.0, 1.0);
  EXPECT_TRUE(verify_comparison(disc, d, PotentialSpec::make("quadratic", 1.0), {1.0, 10.0}).pass());
  const auto bad = make_problem_data(disc.mesh, 1.0, 0.0, 1.0, 1.0);
  EXPECT_THROW(verify_comparison(disc, bad, PotentialSpec::make("quadratic", 1.0), {1.0}), PreconditionError);
  EXPECT_THROW(verify_comparison(disc, d, PotentialSpec::make("abs_origin", 1.0), {1.0}), PreconditionError);
}

TEST(Monotonicity, ConvexPass) {
  const Discretization disc = square(8);
  const auto d = make_problem_data(disc.mesh, -1.0, 0.5, 1.0, 1.0);
  auto rep = verify_monotonicity(disc, d, PotentialSpec::make("quadratic", 1.0), {{1.0, 10.0}, {10.0, 100.0}});
  EXPECT_TRUE(rep.pass()) << rep.summary();
  EXPECT_TRUE(rep.in_scope);
  rep = verify_monotonicity(disc, d, PotentialSpec::make("truncated_quadratic", 1.0), {{1.0, 5.0}});
  EXPECT_TRUE(rep.pass()) << rep.summary();
}

TEST(Monotonicity, NonconvexNeedsOverride) {
  const Discretization disc = square(8);
  const auto d = make_problem_data(disc.mesh, -1.0, 0.5, 1.0, 1.0);
  const auto p = PotentialSpec::make("exp_quadratic", 1.0);
  EXPECT_THROW(verify_monotonicity(disc, d, p, {{1.0, 10.0}}), PreconditionError);
  const auto rep = verify_monotonicity(disc, d, p, {{1.0, 10.0}}, true);
  EXPECT_FALSE(rep.in_scope);
  EXPECT_NE(rep.summary().find("outside theorem scope"), std::string::npos);
  for (const auto& c : rep.claims) {
    if (c.name.rfind("u(", 0) == 0) EXPECT_TRUE(c.informational);
  }
}

TEST(AlphaConvergence, QuadraticRate) {
  const Discretization disc = square(8);
  const auto d = make_problem_data(disc.mesh, 0.0, 0.0, 1.0, 1.0);
  const auto rep =
      verify_alpha_convergence(disc, d, PotentialSpec::make("quadratic", 1.0), {1.0, 10.0, 100.0, 1000.0});
  EXPECT_TRUE(rep.pass()) << rep.summary();
  // Errors are exactly proportional to 1/(1+alpha).
  EXPECT_NEAR(rep.metrics.at("slope_vs_1_plus_alpha"), -1.0, 1e-8);
  for (std::size_t k = 1; k < rep.rows.size(); ++k) EXPECT_LT(rep.rows[k].err_V, rep.rows[k - 1].err_V);
}

TEST(AlphaConvergence, ExpQuadraticDecreasing) {
  const Discretization disc = square(8);
  const auto d = make_problem_data(disc.mesh, -1.0, 0.5, 1.0, 1.0);
  const auto rep =
      verify_alpha_convergence(disc, d, PotentialSpec::make("exp_quadratic", 1.0), {1.0, 10.0, 100.0, 1000.0});
  EXPECT_TRUE(rep.pass()) << rep.summary();
  for (std::size_t k = 1; k < rep.rows.size(); ++k) EXPECT_LT(rep.rows[k].err_V, rep.rows[k - 1].err_V);
}

TEST(AlphaConvergence, SingleAlpha) {
  const Discretization disc = square(4);
  const auto d = make_problem_data(disc.mesh, -1.0, 0.5, 1.0, 1.0);
  const auto rep = verify_alpha_convergence(disc, d, PotentialSpec::make("quadratic", 1.0), {5.0});
  EXPECT_EQ(rep.rows.size(), 1u);
  EXPECT_EQ(rep.metrics.count("slope_vs_alpha"), 0u);
  EXPECT_EQ(find_claim(rep, "error nonincreasing"), nullptr);
}

TEST(AlphaConvergence, RequiresStrictCondition) {
  const Discretization disc = square(4);
  const auto d = make_problem_data(disc.mesh, -1.0, 0.5, 1.0, 1.0);
  EXPECT_THROW(verify_alpha_convergence(disc, d, PotentialSpec::make("zero", 1.0), {1.0, 2.0}), PreconditionError);
}

TEST(ContinuousDependence, QuadraticHalving) {
  const Discretization disc = square(8);
  const auto d = make_problem_data(disc.mesh, -1.0, 0.5, 1.0, 2.0);
  const auto seq = bump_sequence(disc, d, [](double x, double y) { return -x * (1 - x) * y * (1 - y); },
                                 {0, 1, 2, 3, 4});
  const auto rep = verify_continuous_dependence(disc, d, PotentialSpec::make("quadratic", 1.0), seq);
  EXPECT_TRUE(rep.in_scope);
  EXPECT_TRUE(rep.pass()) << rep.summary();
  for (int k = 1; k <= 4; ++k) EXPECT_NEAR(rep.metrics.at("ratio_" + std::to_string(k)), 2.0, 1e-8);
}

TEST(ContinuousDependence, ZeroPerturbation) {
  const Discretization disc = square(6);
  const auto d = make_problem_data(disc.mesh, -1.0, 0.5, 1.0, 0.5);
  const auto rep = verify_continuous_dependence(disc, d, PotentialSpec::make("exp_quadratic", 1.0), {d, d});
  for (const auto& row : rep.rows) EXPECT_EQ(row.err_V, 0.0);
}

TEST(ContinuousDependence, SmallnessViolationDowngrades) {
  const Discretization disc = square(6);
  const auto d = make_problem_data(disc.mesh, -1.0, 0.5, 1.0, 50.0);
  const auto seq = bump_sequence(disc, d, [](double, double) { return -1.0; }, {0, 1});
  const auto rep = verify_continuous_dependence(disc, d, PotentialSpec::make("exp_quadratic", 1.0), seq);
  EXPECT_FALSE(rep.in_scope);
  const Claim* c = find_claim(rep, "error decreasing");
  ASSERT_NE(c, nullptr);
  EXPECT_TRUE(c->informational);
}

TEST(Refinement, AffineRobin) {
  RefinementSpec spec;
  spec.b = 1.0;
  spec.alpha = 3.0;
  spec.problem = RefinementProblem::Robin;
  spec.exact = [](double x, double) { return 0.75 * x; };
  const auto rep = refinement_study(spec, {2, 4, 8, 16});
  EXPECT_TRUE(rep.pass()) << rep.summary();
  for (const auto& row : rep.rows) EXPECT_GE(row.margin_min, -1e-9);
}

TEST(Refinement, DirichletSecondOrder) {
  RefinementSpec spec;
  spec.g = [](double, double) { return -1.0; };
  spec.b = 1.0;
  spec.exact = [](double x, double) { return 0.5 * x * x + 0.5 * x; };
  const auto rep = refinement_study(spec, {4, 8, 16, 32});
  EXPECT_TRUE(rep.pass()) << rep.summary();
  EXPECT_EQ(rep.claims.size(), 3u);
  EXPECT_EQ(refinement_study(spec, {4}).rows.size(), 1u);
}

TEST(Refinement, L2ErrorOfInterpolatedAffine) {
  const Mesh m = generate_unit_square_mesh(3);
  Vector u(static_cast<Eigen::Index>(m.num_vertices()));
  for (std::size_t v = 0; v < m.num_vertices(); ++v) u[static_cast<Eigen::Index>(v)] = 2 * m.vertices[v].x - m.vertices[v].y;
  EXPECT_LT(l2_error(m, u, [](double x, double y) { return 2 * x - y; }), 1e-15);
  // ||x^2||_{L2(0,1)} = 1/sqrt(5), exact for the degree-5 rule.
  EXPECT_NEAR(l2_error(m, Vector::Zero(u.size()), [](double x, double) { return x * x; }), 1 / std::sqrt(5.0), 1e-14);
}

TEST(Uniqueness, SmallnessFlags) {
  const Discretization disc = square(8);
  const auto p = PotentialSpec::make("exp_quadratic", 1.0);
  const auto small = verify_uniqueness(disc, make_problem_data(disc.mesh, -1.0, 0.5, 1.0, 0.5), p, 4);
  EXPECT_TRUE(small.in_scope);
  EXPECT_TRUE(small.pass()) << small.summary();
  const auto big = verify_uniqueness(disc, make_problem_data(disc.mesh, -1.0, 0.5, 1.0, 100.0), p, 4);
  EXPECT_FALSE(big.in_scope);
  EXPECT_TRUE(find_claim(big, "multistart")->informational);
}

TEST(Reports, CsvDeterministicAcrossWorkers) {
  const Discretization disc = square(8);
  const auto d = make_problem_data(disc.mesh, -1.0, 0.5, 1.0, 1.0);
  const auto p = PotentialSpec::make("exp_quadratic", 1.0);
  ExperimentOptions one, four;
  four.workers = 4;
  const auto a = verify_comparison(disc, d, p, {1.0, 3.0, 10.0, 30.0, 100.0}, one);
  const auto b = verify_comparison(disc, d, p, {1.0, 3.0, 10.0, 30.0, 100.0}, four);
  EXPECT_EQ(a.to_csv(), b.to_csv());
  EXPECT_EQ(a.summary(), b.summary());
  EXPECT_EQ(a.to_csv().substr(0, a.to_csv().find('\n')),
            "case_id,n,alpha,potential,err_V,margin_min,certificate_max,verdict");
}
