#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "hvi/potential_checks.hpp"
#include "hvi/solver.hpp"

namespace hvi {

enum class Command { Solve, Experiment, CheckPotential };

std::string_view command_name(Command c);
std::optional<Command> parse_command(std::string_view s);

struct ConfigIssue {
  int line = 0;  // 0 when the issue is not tied to one line
  std::string key;
  std::string message;

  std::string text() const;
};

class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(std::vector<ConfigIssue> issues);
  std::vector<ConfigIssue> issues;
};

/// Flat "section.key = value" run configuration.
struct RunConfig {
  std::optional<Command> command;

  std::optional<int> mesh_n;
  std::optional<std::filesystem::path> mesh_file;

  std::string g = "0";
  std::string q = "0";
  double b = 0.0;
  double alpha = 1.0;
  std::vector<double> alphas;

  std::string potential_id = "quadratic";
  std::optional<double> potential_b;
  std::map<std::string, double> potential_params;

  SolverOptions solver;
  /// hvi | vi_convex | robin | robin_lumped | dirichlet
  std::string solve_kind = "hvi";

  std::string experiment_id;
  std::vector<std::pair<double, double>> alpha_pairs;
  bool override_hhh = false;
  std::optional<double> target_rel;
  std::string bump = "x*(1-x)*y*(1-y)";
  std::vector<int> levels{0, 1, 2, 3, 4};
  std::vector<int> n_list;
  std::string exact;
  /// dirichlet | robin | robin_lumped | hvi
  std::string refinement_problem = "dirichlet";
  int starts = 10;
  int workers = 1;

  std::optional<SampleGrid> grid;

  /// Key/value pairs as written, in file order.
  std::vector<std::pair<std::string, std::string>> entries;
};

/// All keys the parser accepts, besides the potential.params.* family.
const std::vector<std::string>& known_config_keys();

/// Parses and validates; throws ConfigError listing every problem found.
/// Relative mesh paths are resolved against `base_dir`.
RunConfig parse_config(std::string_view text, const std::filesystem::path& base_dir = {});

struct PotentialDescription {
  std::string text;
  bool all_pass = true;
};

/// Table of j, dj and j0(r; b-r) around the breakpoints, followed by the
/// hypothesis checks and the relaxed monotonicity estimate.
PotentialDescription describe_potential(std::string_view id, double b,
                                        const std::map<std::string, double>& params,
                                        const std::optional<SampleGrid>& grid = std::nullopt);

/// Executes `cmd` and writes its outputs into `out_dir`. Returns the exit
/// status: 0 when every verdict passes and every solve is certified, 1 on a
/// failed verdict or uncertified solve, 2 on configuration, input or
/// precondition errors (an error.json file is written in that case).
int run(const RunConfig& config, Command cmd, const std::filesystem::path& out_dir);

/// Reads and parses the config file, then calls run(); config and IO
/// failures are reported through error.json as well.
int run_file(Command cmd, const std::filesystem::path& config_path, const std::filesystem::path& out_dir);

}  // namespace hvi
