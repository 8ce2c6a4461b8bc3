#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <sstream>

#include "hvi/cli.hpp"
#include "hvi/expression.hpp"

namespace hvi {

std::string_view command_name(Command c) {
  switch (c) {
    case Command::Solve: return "solve";
    case Command::Experiment: return "experiment";
    case Command::CheckPotential: return "check-potential";
  }
  return "?";
}

std::optional<Command> parse_command(std::string_view s) {
  if (s == "solve") return Command::Solve;
  if (s == "experiment") return Command::Experiment;
  if (s == "check-potential") return Command::CheckPotential;
  return std::nullopt;
}

std::string ConfigIssue::text() const {
  std::string out;
  if (line > 0) out += "line " + std::to_string(line) + ": ";
  if (!key.empty()) out += key + ": ";
  return out + message;
}

namespace {

std::string join_issues(const std::vector<ConfigIssue>& issues) {
  std::string out = "invalid configuration";
  for (const auto& i : issues) out += "\n  " + i.text();
  return out;
}

}  // namespace

ConfigError::ConfigError(std::vector<ConfigIssue> list)
    : std::invalid_argument(join_issues(list)), issues(std::move(list)) {}

const std::vector<std::string>& known_config_keys() {
  static const std::vector<std::string> keys = {
      "command",
      "mesh.n",
      "mesh.file",
      "problem.g",
      "problem.q",
      "problem.b",
      "problem.alpha",
      "problem.alphas",
      "potential.id",
      "potential.b",
      "solver.tol_interior",
      "solver.tol_inclusion",
      "solver.max_iters",
      "solver.damping_init",
      "solver.seed",
      "solve.kind",
      "experiment.id",
      "experiment.alpha_pairs",
      "experiment.override_hhh",
      "experiment.target_rel",
      "experiment.bump",
      "experiment.levels",
      "experiment.n_list",
      "experiment.exact",
      "experiment.problem",
      "experiment.starts",
      "experiment.workers",
      "check.grid_lo",
      "check.grid_hi",
      "check.grid_count",
  };
  return keys;
}

namespace {

constexpr std::string_view kParamPrefix = "potential.params.";

std::size_t edit_distance(std::string_view a, std::string_view b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

std::string nearest_key(std::string_view key) {
  std::string best;
  std::size_t best_d = std::string::npos;
  for (const auto& k : known_config_keys()) {
    const std::size_t d = edit_distance(key, k);
    if (d < best_d) {
      best_d = d;
      best = k;
    }
  }
  return best;
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_list(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const auto comma = s.find(',', start);
    const auto piece = trim(s.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (!piece.empty()) out.push_back(piece);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

struct Entry {
  std::string value;
  int line = 0;
};

class Reader {
 public:
  Reader(const std::map<std::string, Entry>& entries, std::vector<ConfigIssue>& issues)
      : entries_(entries), issues_(issues) {}

  const Entry* find(const std::string& key) const {
    auto it = entries_.find(key);
    return it == entries_.end() ? nullptr : &it->second;
  }

  void issue(const std::string& key, const std::string& msg) {
    const Entry* e = find(key);
    issues_.push_back({e ? e->line : 0, key, msg});
  }

  std::optional<double> number(const std::string& key, std::string_view text) {
    double v = 0.0;
    const char* first = text.data();
    const char* last = text.data() + text.size();
    if (first != last && *first == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last || !std::isfinite(v)) {
      issue(key, "expected a number, got '" + std::string(text) + "'");
      return std::nullopt;
    }
    return v;
  }

  std::optional<long long> integer(const std::string& key, std::string_view text) {
    long long v = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size()) {
      issue(key, "expected an integer, got '" + std::string(text) + "'");
      return std::nullopt;
    }
    return v;
  }

  void read(const std::string& key, double& out) {
    if (const Entry* e = find(key)) {
      if (auto v = number(key, e->value)) out = *v;
    }
  }

  void read(const std::string& key, std::optional<double>& out) {
    if (const Entry* e = find(key)) out = number(key, e->value);
  }

  void read(const std::string& key, int& out) {
    if (const Entry* e = find(key)) {
      if (auto v = integer(key, e->value)) {
        if (*v < -2147483647LL || *v > 2147483647LL) {
          issue(key, "integer out of range");
        } else {
          out = static_cast<int>(*v);
        }
      }
    }
  }

  void read(const std::string& key, std::string& out) {
    if (const Entry* e = find(key)) out = e->value;
  }

  void read(const std::string& key, bool& out) {
    if (const Entry* e = find(key)) {
      if (e->value == "true" || e->value == "1") {
        out = true;
      } else if (e->value == "false" || e->value == "0") {
        out = false;
      } else {
        issue(key, "expected true or false, got '" + e->value + "'");
      }
    }
  }

  void read(const std::string& key, std::vector<double>& out) {
    if (const Entry* e = find(key)) {
      out.clear();
      for (auto piece : split_list(e->value)) {
        if (auto v = number(key, piece)) out.push_back(*v);
      }
      if (out.empty()) issue(key, "expected a comma-separated list of numbers");
    }
  }

  void read(const std::string& key, std::vector<int>& out) {
    if (const Entry* e = find(key)) {
      out.clear();
      for (auto piece : split_list(e->value)) {
        if (auto v = integer(key, piece)) out.push_back(static_cast<int>(*v));
      }
      if (out.empty()) issue(key, "expected a comma-separated list of integers");
    }
  }

  void expression(const std::string& key, const std::string& text) {
    try {
      (void)Expression::parse(text);
    } catch (const ExpressionError& err) {
      issue(key, err.what());
    }
  }

 private:
  const std::map<std::string, Entry>& entries_;
  std::vector<ConfigIssue>& issues_;
};

}  // namespace

RunConfig parse_config(std::string_view text, const std::filesystem::path& base_dir) {
  std::vector<ConfigIssue> issues;
  std::map<std::string, Entry> entries;
  RunConfig cfg;

  std::istringstream in{std::string(text)};
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      issues.push_back({line_no, "", "expected 'key = value', got '" + std::string(line) + "'"});
      continue;
    }
    const std::string key(trim(line.substr(0, eq)));
    const std::string value(trim(line.substr(eq + 1)));
    if (key.empty()) {
      issues.push_back({line_no, "", "missing key before '='"});
      continue;
    }
    const bool is_param = key.size() > kParamPrefix.size() && key.rfind(kParamPrefix, 0) == 0;
    const auto& known = known_config_keys();
    if (!is_param && std::find(known.begin(), known.end(), key) == known.end()) {
      issues.push_back({line_no, key, "unknown key (did you mean '" + nearest_key(key) + "'?)"});
      continue;
    }
    if (value.empty()) {
      issues.push_back({line_no, key, "missing value"});
      continue;
    }
    if (auto it = entries.find(key); it != entries.end()) {
      issues.push_back({line_no, key,
                        "duplicate key (lines " + std::to_string(it->second.line) + " and " +
                            std::to_string(line_no) + ")"});
      continue;
    }
    entries[key] = {value, line_no};
    cfg.entries.emplace_back(key, value);
  }

  Reader r(entries, issues);
  if (const Entry* e = r.find("command")) {
    cfg.command = parse_command(e->value);
    if (!cfg.command) r.issue("command", "expected solve, experiment or check-potential, got '" + e->value + "'");
  }

  if (const Entry* e = r.find("mesh.n")) {
    if (auto n = r.integer("mesh.n", e->value)) {
      if (*n >= 1 && *n <= 100000) {
        cfg.mesh_n = static_cast<int>(*n);
      } else {
        r.issue("mesh.n", "must lie between 1 and 100000");
      }
    }
  }
  if (const Entry* e = r.find("mesh.file")) {
    std::filesystem::path p(e->value);
    cfg.mesh_file = p.is_relative() && !base_dir.empty() ? base_dir / p : p;
  }
  if (cfg.mesh_n && cfg.mesh_file) r.issue("mesh.file", "give either mesh.n or mesh.file, not both");

  r.read("problem.g", cfg.g);
  r.read("problem.q", cfg.q);
  r.expression("problem.g", cfg.g);
  r.expression("problem.q", cfg.q);
  r.read("problem.b", cfg.b);
  if (r.find("problem.alpha")) {
    r.read("problem.alpha", cfg.alpha);
    if (!(cfg.alpha > 0.0)) r.issue("problem.alpha", "problem.alpha must be positive");
  }
  r.read("problem.alphas", cfg.alphas);
  for (double a : cfg.alphas) {
    if (!(a > 0.0)) {
      r.issue("problem.alphas", "problem.alphas must be positive");
      break;
    }
  }

  r.read("potential.id", cfg.potential_id);
  r.read("potential.b", cfg.potential_b);
  for (const auto& [key, entry] : entries) {
    if (key.rfind(kParamPrefix, 0) != 0) continue;
    if (auto v = r.number(key, entry.value)) cfg.potential_params[key.substr(kParamPrefix.size())] = *v;
  }

  r.read("solver.tol_interior", cfg.solver.tol_interior);
  r.read("solver.tol_inclusion", cfg.solver.tol_inclusion);
  r.read("solver.max_iters", cfg.solver.max_iters);
  r.read("solver.damping_init", cfg.solver.damping_init);
  if (!(cfg.solver.tol_interior > 0.0)) r.issue("solver.tol_interior", "must be positive");
  if (!(cfg.solver.tol_inclusion > 0.0)) r.issue("solver.tol_inclusion", "must be positive");
  if (cfg.solver.max_iters < 1) r.issue("solver.max_iters", "must be at least 1");
  if (!(cfg.solver.damping_init > 0.0 && cfg.solver.damping_init <= 1.0)) {
    r.issue("solver.damping_init", "must lie in (0, 1]");
  }
  if (const Entry* e = r.find("solver.seed")) {
    std::uint64_t seed = 0;
    auto [ptr, ec] = std::from_chars(e->value.data(), e->value.data() + e->value.size(), seed);
    if (ec != std::errc() || ptr != e->value.data() + e->value.size()) {
      r.issue("solver.seed", "expected a nonnegative integer, got '" + e->value + "'");
    } else {
      cfg.solver.seed = seed;
    }
  }

  r.read("solve.kind", cfg.solve_kind);
  static const std::vector<std::string> kinds = {"hvi", "vi_convex", "robin", "robin_lumped", "dirichlet"};
  if (std::find(kinds.begin(), kinds.end(), cfg.solve_kind) == kinds.end()) {
    r.issue("solve.kind", "expected one of hvi, vi_convex, robin, robin_lumped, dirichlet");
  }

  r.read("experiment.id", cfg.experiment_id);
  static const std::vector<std::string> experiments = {"linear_theorem",        "comparison", "monotonicity",
                                                       "alpha_convergence",     "refinement", "uniqueness",
                                                       "continuous_dependence"};
  if (!cfg.experiment_id.empty() &&
      std::find(experiments.begin(), experiments.end(), cfg.experiment_id) == experiments.end()) {
    r.issue("experiment.id", "unknown experiment '" + cfg.experiment_id +
                                 "' (expected linear_theorem, comparison, monotonicity, alpha_convergence, "
                                 "continuous_dependence, refinement or uniqueness)");
  }
  if (const Entry* e = r.find("experiment.alpha_pairs")) {
    for (auto piece : split_list(e->value)) {
      const auto colon = piece.find(':');
      if (colon == std::string_view::npos) {
        r.issue("experiment.alpha_pairs", "expected pairs a1:a2, got '" + std::string(piece) + "'");
        continue;
      }
      auto a1 = r.number("experiment.alpha_pairs", trim(piece.substr(0, colon)));
      auto a2 = r.number("experiment.alpha_pairs", trim(piece.substr(colon + 1)));
      if (a1 && a2) cfg.alpha_pairs.emplace_back(*a1, *a2);
    }
  }
  r.read("experiment.override_hhh", cfg.override_hhh);
  r.read("experiment.target_rel", cfg.target_rel);
  r.read("experiment.bump", cfg.bump);
  r.expression("experiment.bump", cfg.bump);
  r.read("experiment.levels", cfg.levels);
  r.read("experiment.n_list", cfg.n_list);
  for (int n : cfg.n_list) {
    if (n < 1) {
      r.issue("experiment.n_list", "mesh sizes must be at least 1");
      break;
    }
  }
  r.read("experiment.exact", cfg.exact);
  if (!cfg.exact.empty()) r.expression("experiment.exact", cfg.exact);
  r.read("experiment.problem", cfg.refinement_problem);
  static const std::vector<std::string> problems = {"dirichlet", "robin", "robin_lumped", "hvi"};
  if (std::find(problems.begin(), problems.end(), cfg.refinement_problem) == problems.end()) {
    r.issue("experiment.problem", "expected one of dirichlet, robin, robin_lumped, hvi");
  }
  r.read("experiment.starts", cfg.starts);
  if (cfg.starts < 1) r.issue("experiment.starts", "must be at least 1");
  r.read("experiment.workers", cfg.workers);
  if (cfg.workers < 1) r.issue("experiment.workers", "must be at least 1");

  if (r.find("check.grid_lo") || r.find("check.grid_hi") || r.find("check.grid_count")) {
    SampleGrid grid;
    const double b = cfg.potential_b.value_or(cfg.b);
    grid.lo = b - 10.0;
    grid.hi = b + 10.0;
    r.read("check.grid_lo", grid.lo);
    r.read("check.grid_hi", grid.hi);
    r.read("check.grid_count", grid.count);
    if (!(grid.lo < grid.hi)) r.issue("check.grid_hi", "grid must satisfy lo < hi");
    if (grid.count < 2) r.issue("check.grid_count", "must be at least 2");
    cfg.grid = grid;
  }

  if (!issues.empty()) {
    std::stable_sort(issues.begin(), issues.end(),
                     [](const ConfigIssue& a, const ConfigIssue& b) { return a.line < b.line; });
    throw ConfigError(std::move(issues));
  }
  return cfg;
}

}  // namespace hvi
