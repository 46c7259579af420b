#include <CLI11.hpp>

#include <iostream>

#include "blaschke/experiment.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Finite Blaschke products: iteration, indestructibility and maximal products"};
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  bool quiet = false;
  app.add_option("--config", config, "Experiment config (JSON)")->required();
  app.add_option("--seed", seed, "Seed (overrides the config)");
  app.add_option("--out", out, "Output path (overrides the config)");
  app.add_flag("--quiet", quiet, "Suppress the summary line");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : blaschke::cli::kExitSchema;
  }
  return blaschke::cli::run(config, {seed, out, quiet}, std::cerr);
}
