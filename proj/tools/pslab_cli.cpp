#include <cstdio>
#include <iostream>

#include <CLI11.hpp>

#include "pslab/config.hpp"
#include "pslab/errors.hpp"
#include "pslab/runner.hpp"

int main(int argc, char** argv) {
  using namespace pslab;
  CLI::App app{"Resolvent, semigroup and coercivity experiments for shear and vortex linearizations"};
  app.require_subcommand(1);

  std::string config_path;
  CliOverrides ov;
  std::vector<double> alphas;
  std::string model, out;
  int l = 0, modes = 0;
  std::uint64_t seed = 0;
  bool no_cache = false, svg = false;

  for (const auto& name : experiments()) {
    CLI::App* sub = app.add_subcommand(name, "run the " + name + " experiment");
    sub->add_option("--config", config_path, "YAML run configuration");
    sub->add_option("--model", model, "kolmogorov or oseen");
    sub->add_option("--alpha", alphas, "one or more alpha values");
    sub->add_option("--l", l, "horizontal wavenumber (kolmogorov)");
    sub->add_option("--modes", modes, "Fourier truncation N");
    sub->add_option("--out", out, "output directory");
    sub->add_flag("--no-cache", no_cache, "ignore cached results");
    sub->add_flag("--svg", svg, "emit an SVG figure");
    sub->add_option("--seed", seed, "probe seed");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    CLI::App* sub = app.get_subcommands().front();
    RunConfig cfg;
    if (!config_path.empty()) cfg = load_config(config_path);
    ov.experiment = sub->get_name();
    if (sub->count("--model")) ov.model = model;
    if (sub->count("--alpha")) ov.alphas = alphas;
    if (sub->count("--l")) ov.l = l;
    if (sub->count("--modes")) ov.modes = modes;
    if (sub->count("--out")) ov.out_dir = out;
    if (sub->count("--svg")) ov.svg = svg;
    if (sub->count("--seed")) ov.seed = seed;
    apply_overrides(cfg, ov);
    validate(cfg);
    const ResultRecord rec = run(cfg, RunOptions{no_cache});
    std::cout << "config " << rec.config_hash << (rec.from_cache ? " (cached)" : "") << "\n";
    for (const auto& [name, body] : rec.files) std::cout << "wrote " << cfg.out_dir << "/" << name << "\n";
    std::cout << rec.payload.dump(2) << "\n";
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e);
  }
}
