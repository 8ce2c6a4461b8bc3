#include <filesystem>
#include <string>

#include "CLI11.hpp"
#include "hvi/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Mixed elliptic problems with nonmonotone boundary laws"};
  app.require_subcommand(1);

  struct Args {
    std::string config;
    std::string out;
  };
  Args solve, experiment, check;
  auto add = [&](const char* name, const char* help, Args& args) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", args.config, "flat key = value run configuration")->required();
    sub->add_option("--out", args.out, "output directory")->required();
    return sub;
  };
  CLI::App* solve_cmd = add("solve", "solve one problem and certify the result", solve);
  CLI::App* exp_cmd = add("experiment", "run a verification experiment", experiment);
  CLI::App* check_cmd = add("check-potential", "tabulate a potential and check its hypotheses", check);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (solve_cmd->parsed()) return hvi::run_file(hvi::Command::Solve, solve.config, solve.out);
  if (exp_cmd->parsed()) return hvi::run_file(hvi::Command::Experiment, experiment.config, experiment.out);
  if (check_cmd->parsed()) return hvi::run_file(hvi::Command::CheckPotential, check.config, check.out);
  return 2;
}
