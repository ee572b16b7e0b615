#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "fracmem/run.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Composite membrane optimisation with the integral fractional Laplacian"};
  app.require_subcommand(1, 1);

  std::string config;
  std::string out;
  std::uint64_t seed = 0;
  const char* commands[] = {"solve",           "optimize",           "alpha-bar",        "convert-pn",
                            "experiment-ball", "experiment-annulus", "validate-operator"};
  for (const char* name : commands) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", config, "JSON run configuration")->required();
    sub->add_option("--out", out, "output directory (overrides output_dir)");
    sub->add_option("--seed", seed, "seed (overrides the config)");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : fracmem::kExitValidation;
  }

  const auto* sub = app.get_subcommands().front();
  std::optional<std::filesystem::path> out_dir;
  if (sub->count("--out")) out_dir = out;
  std::optional<std::uint64_t> seed_override;
  if (sub->count("--seed")) seed_override = seed;
  return fracmem::run_command(sub->get_name(), config, out_dir, seed_override, std::cerr);
}
