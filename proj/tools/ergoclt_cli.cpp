// Command-line front door: run a config, run a preset, or list presets.

#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "ergoclt/experiment.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Exact martingale-approximation and CLT checks on finite Markov shifts"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::string preset_name;
  std::uint64_t seed = 0;
  int workers = 0;

  auto* run = app.add_subcommand("run", "run an experiment config");
  run->add_option("--config", config_path, "config file")->required();
  run->add_option("--out", out_dir, "output directory")->required();
  auto* seed_opt = run->add_option("--seed", seed, "override the config seed");
  auto* workers_opt = run->add_option("--workers", workers, "Monte Carlo worker threads")->check(CLI::PositiveNumber);

  auto* preset = app.add_subcommand("preset", "run a named preset");
  preset->add_option("--name", preset_name, "preset id (see `list`)")->required();
  preset->add_option("--out", out_dir, "output directory")->required();
  auto* preset_seed = preset->add_option("--seed", seed, "override the preset seed");
  auto* preset_workers =
      preset->add_option("--workers", workers, "Monte Carlo worker threads")->check(CLI::PositiveNumber);

  auto* list = app.add_subcommand("list", "list presets");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : ergoclt::kExitConfigError;
  }

  if (list->parsed()) {
    std::cout << ergoclt::list_presets();
    return 0;
  }
  if (run->parsed()) {
    return ergoclt::run(config_path, out_dir, *seed_opt ? std::optional(seed) : std::nullopt,
                        *workers_opt ? std::optional(workers) : std::nullopt, std::cerr);
  }
  return ergoclt::run_preset(preset_name, out_dir, *preset_seed ? std::optional(seed) : std::nullopt,
                             *preset_workers ? std::optional(workers) : std::nullopt, std::cerr);
}
