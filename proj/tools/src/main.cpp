#include "adot_cli/commands.hpp"
#include "adot_cli/io.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <optional>

int main(int argc, char** argv) {
  using namespace adot::cli;

  CLI::App app{"Adversarial sample-based optimal transport"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::vector<std::string> sets;
  bool header = false;
  std::string result;

  app.add_option("--config", config_path, "YAML run configuration")->check(CLI::ExistingFile);
  app.add_option("--seed", seed, "Run seed (dataset seeds default to seed and seed+1)");
  app.add_option("--out", out, "Output directory");
  app.add_option("--set", sets, "Override a config entry, e.g. --set solver.tolerance=1e-8")
      ->take_all();
  app.add_flag("--header", header, "Write an x1,...,xd header row in sample CSVs");

  app.fallthrough();
  auto* gen = app.add_subcommand("gen-data", "Generate source/target samples");
  auto* solve = app.add_subcommand("solve", "Run the global transport solver");
  auto* bench = app.add_subcommand("benchmark", "Run the power-map convergence sweeps");
  auto* plots = app.add_subcommand("emit-plots", "Write plot-ready CSVs from a solve result");
  plots->add_option("--result", result, "Result document (default <out>/result.json)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kInputError;
  }

  Overrides overrides;
  for (const auto& s : sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) {
      std::cerr << "error: --set expects path=value, got '" << s << "'\n";
      return kInputError;
    }
    overrides.emplace_back(s.substr(0, eq), s.substr(eq + 1));
  }
  if (seed) overrides.emplace_back("seed", std::to_string(*seed));
  if (!out.empty()) overrides.emplace_back("out", "'" + out + "'");
  if (header) overrides.emplace_back("header", "true");
  if (!result.empty()) overrides.emplace_back("plots.result", "'" + result + "'");

  RunConfig cfg;
  try {
    cfg = config_path.empty() ? parse_config("", "<defaults>", overrides)
                              : load_config(config_path, overrides);
    cfg.benchmark.threads = threads_from_env();
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  }

  if (gen->parsed()) return cmd_gen_data(cfg);
  if (solve->parsed()) return cmd_solve(cfg);
  if (bench->parsed()) return cmd_benchmark(cfg);
  return cmd_emit_plots(cfg);
}
