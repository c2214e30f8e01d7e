// Command-line front end: `valiron run <config> [--out DIR] [--seed N] [--verbose]`
// and `valiron catalog`.

#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <string>

#include "valiron/experiment.hpp"
#include "valiron/maps.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Valiron renormalization for hyperbolic self-maps of the Siegel domain"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool verbose = false;
  CLI::App* run = app.add_subcommand("run", "run the experiment a config file describes");
  run->add_option("config", config_path, "path to the config file")->required();
  CLI::Option* out_opt = run->add_option("--out", out_dir, "output directory (overrides the config and VALIRON_OUT_DIR)");
  CLI::Option* seed_opt = run->add_option("--seed", seed, "seed for generated sequences");
  run->add_flag("--verbose", verbose, "include every rung of each sequence in limit traces");

  CLI::App* cat = app.add_subcommand("catalog", "list the built-in maps");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : valiron::exit_error;
  }

  if (cat->parsed()) {
    for (const auto& entry : valiron::catalog()) {
      std::cout << entry.name << "\n  parameters: " << entry.parameters << "\n  " << entry.description << "\n";
    }
    return valiron::exit_ok;
  }

  try {
    const valiron::ExperimentConfig cfg = valiron::load_config(config_path);
    valiron::RunOverrides o;
    if (*out_opt) o.out_dir = out_dir;
    if (*seed_opt) o.seed = seed;
    o.verbose = verbose;
    const valiron::RunOutcome outcome = valiron::run_command(cfg, o);
    std::cout << outcome.summary;
    for (const auto& f : outcome.files) std::cout << "wrote " << f.string() << "\n";
    return outcome.status;
  } catch (const valiron::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return valiron::exit_error;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return valiron::exit_error;
  }
}
