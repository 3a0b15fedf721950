#include <CLI11.hpp>

#include <iostream>

#include "defectgeom/config.hpp"
#include "defectgeom/pipelines.hpp"

using namespace defectgeom;

int main(int argc, char** argv) {
  CLI::App app{"defectgeom: geometry of defective crystals on a z-invariant grid"};
  app.require_subcommand(1);

  std::string config_path, out_dir;
  int refine = -1;
  std::vector<std::string> tols;

  const char* names[] = {"analyze", "verify", "transport", "geodesic", "evolve"};
  const char* help[] = {"compute and write every derived field", "run the residual report",
                        "parallel transport along configured paths", "trace a geodesic",
                        "evolve point-defect and contortion fields"};
  std::vector<CLI::App*> subs;
  for (int i = 0; i < 5; ++i) {
    CLI::App* s = app.add_subcommand(names[i], help[i]);
    s->add_option("--config", config_path, "configuration file")->required()->check(CLI::ExistingFile);
    s->add_option("--out", out_dir, "output directory (overrides output.dir)");
    s->add_option("--refine", refine, "refinement levels for the order column")->check(CLI::Range(0, 4));
    s->add_option("--tol", tols, "tolerance override name=value")->take_all();
    subs.push_back(s);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    RunConfig cfg = load_config(config_path);
    if (!out_dir.empty()) cfg.output.dir = out_dir;
    if (refine >= 0) cfg.refine = refine;
    for (const auto& t : tols) apply_tolerance_override(cfg, t);
    if (subs[0]->parsed()) return run_analyze(cfg, std::cout);
    if (subs[1]->parsed()) return run_verify(cfg, std::cout);
    if (subs[2]->parsed()) return run_transport(cfg, std::cout);
    if (subs[3]->parsed()) return run_geodesic(cfg, std::cout);
    return run_evolve(cfg, std::cout);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 4;
  }
}
