#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "hvi/cli.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using namespace hvi;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("hvi_cli_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string issues_text(std::string_view cfg) {
  try {
    parse_config(cfg);
  } catch (const ConfigError& err) {
    return err.what();
  }
  return {};
}

}  // namespace

TEST(Config, Minimal) {
  const RunConfig c = parse_config(
      "# comment\n"
      "mesh.n = 8\n"
      "problem.g = -1\n"
      "problem.b = 1\n"
      "potential.id = exp_quadratic\n"
      "experiment.alpha_pairs = 1:10, 10:100\n"
      "problem.alphas = 1, 10\n");
  EXPECT_EQ(*c.mesh_n, 8);
  EXPECT_EQ(c.g, "-1");
  EXPECT_EQ(c.potential_id, "exp_quadratic");
  ASSERT_EQ(c.alpha_pairs.size(), 2u);
  EXPECT_EQ(c.alpha_pairs[1].second, 100.0);
  EXPECT_EQ(c.alphas, (std::vector<double>{1.0, 10.0}));
  EXPECT_EQ(c.entries.size(), 6u);
}

TEST(Config, NegativeAlpha) {
  const std::string msg = issues_text("mesh.n = 4\nproblem.alpha = -1\n");
  EXPECT_NE(msg.find("line 2"), std::string::npos) << msg;
  EXPECT_NE(msg.find("problem.alpha must be positive"), std::string::npos) << msg;
}

TEST(Config, DuplicateNamesBothLines) {
  const std::string msg = issues_text("mesh.n = 4\nproblem.b = 1\nmesh.n = 8\n");
  EXPECT_NE(msg.find("duplicate key (lines 1 and 3)"), std::string::npos) << msg;
}

TEST(Config, UnknownKeySuggests) {
  const std::string msg = issues_text("problem.alfa = 2\n");
  EXPECT_NE(msg.find("did you mean 'problem.alpha'"), std::string::npos) << msg;
}

TEST(Config, ReportsEveryIssue) {
  try {
    parse_config("mesh.n = zero\nsolve.kind = magic\nnot a pair\n");
    FAIL();
  } catch (const ConfigError& err) {
    EXPECT_EQ(err.issues.size(), 3u) << err.what();
  }
}

TEST(Config, BadExpression) {
  const std::string msg = issues_text("problem.g = 1 +\n");
  EXPECT_NE(msg.find("problem.g"), std::string::npos) << msg;
}

TEST(Run, MissingMeshFile) {
  const fs::path dir = scratch("missing_mesh");
  std::ofstream(dir / "run.cfg") << "mesh.file = nowhere.mesh\nproblem.b = 1\n";
  EXPECT_EQ(run_file(Command::Solve, dir / "run.cfg", dir / "out"), 2);
  const auto j = nlohmann::json::parse(slurp(dir / "out" / "error.json"));
  EXPECT_EQ(j["exit_code"], 2);
  EXPECT_NE(j["message"].get<std::string>().find("nowhere.mesh"), std::string::npos);
  EXPECT_NE(j["path"].get<std::string>().find("nowhere.mesh"), std::string::npos);
}

TEST(Run, MissingConfigFile) {
  const fs::path dir = scratch("missing_cfg");
  EXPECT_EQ(run_file(Command::Solve, dir / "absent.cfg", dir / "out"), 2);
  EXPECT_TRUE(fs::exists(dir / "out" / "error.json"));
}

TEST(Run, CommandMismatch) {
  RunConfig c = parse_config("command = solve\nmesh.n = 2\nproblem.b = 1\n");
  const fs::path dir = scratch("mismatch");
  EXPECT_EQ(run(c, Command::Experiment, dir), 2);
}

TEST(Run, PreconditionExitsTwo) {
  const fs::path dir = scratch("precondition");
  RunConfig c = parse_config("mesh.n = 4\nproblem.g = 1\nproblem.b = 1\nexperiment.id = linear_theorem\n");
  EXPECT_EQ(run(c, Command::Experiment, dir), 2);
  const auto j = nlohmann::json::parse(slurp(dir / "error.json"));
  EXPECT_EQ(j["kind"], "precondition");
}

TEST(Run, AlphaConvergenceCsv) {
  const fs::path dir = scratch("alpha_conv");
  RunConfig c = parse_config(
      "mesh.n = 8\nproblem.g = -1\nproblem.q = 0.5\nproblem.b = 1\n"
      "problem.alphas = 1, 10, 100, 1000\npotential.id = exp_quadratic\n"
      "experiment.id = alpha_convergence\n");
  EXPECT_EQ(run(c, Command::Experiment, dir), 0);
  std::istringstream csv(slurp(dir / "alpha_convergence.csv"));
  std::string line;
  std::getline(csv, line);
  double prev = 1e300;
  int rows = 0;
  while (std::getline(csv, line)) {
    std::vector<std::string> cols;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) cols.push_back(cell);
    ASSERT_EQ(cols.size(), 8u);
    const double err = std::stod(cols[4]);
    EXPECT_LT(err, prev);
    prev = err;
    ++rows;
  }
  EXPECT_EQ(rows, 4);
  EXPECT_TRUE(fs::exists(dir / "alpha_convergence_summary.txt"));
}

TEST(Run, SolveCertified) {
  const fs::path dir = scratch("solve");
  RunConfig c = parse_config(
      "mesh.n = 16\nproblem.g = -1\nproblem.q = 0.5\nproblem.b = 1\nproblem.alpha = 10\n"
      "potential.id = exp_quadratic\n");
  EXPECT_EQ(run(c, Command::Solve, dir), 0);
  const std::string cert = slurp(dir / "certificate.txt");
  EXPECT_NE(cert.find("certified = true"), std::string::npos) << cert;
  const auto pos = cert.find("certificate_max = ");
  ASSERT_NE(pos, std::string::npos);
  EXPECT_LE(std::stod(cert.substr(pos + 18)), 1e-8);
  EXPECT_TRUE(fs::exists(dir / "solution.csv"));
  EXPECT_TRUE(fs::exists(dir / "mesh.txt"));
}

TEST(Potential, DescribeExpQuadratic) {
  const PotentialDescription d = describe_potential("exp_quadratic", 1.0, {});
  EXPECT_NE(d.text.find("sign H(j)(d) = pass"), std::string::npos) << d.text;
  EXPECT_NE(d.text.find("HHH = fail"), std::string::npos) << d.text;
  const auto pos = d.text.find("m_j estimate = ");
  ASSERT_NE(pos, std::string::npos);
  EXPECT_LE(std::stod(d.text.substr(pos + 15)), 1.0 + 1e-6);
  EXPECT_FALSE(d.all_pass);
}

TEST(Potential, DescribeAbs) {
  const PotentialDescription d = describe_potential("abs", 1.0, {});
  EXPECT_TRUE(d.all_pass) << d.text;
}

TEST(Potential, UnknownIdListsKnown) {
  try {
    describe_potential("cubic", 1.0, {});
    FAIL();
  } catch (const std::invalid_argument& err) {
    const std::string msg = err.what();
    EXPECT_NE(msg.find("quadratic"), std::string::npos) << msg;
    EXPECT_NE(msg.find("exp_quadratic"), std::string::npos) << msg;
  }
}
