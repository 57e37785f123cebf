#include <cstdio>
#include <cstdlib>
#include <exception>
#include <string>

#include "CLI11.hpp"
#include "llg/config.hpp"
#include "llg/experiment.hpp"

int main(int argc, char** argv) {
  CLI::App app{"lattice flows into hypersurfaces: experiment runner"};
  app.require_subcommand(1);

  std::string preset;
  std::string config_path;
  std::string out_dir;
  uint64_t seed = 0;
  int threads = 0;

  CLI::App* run = app.add_subcommand("run", "execute one experiment");
  CLI::Option* opt_preset =
      run->add_option("--preset", preset, "preset name (see list-presets)");
  CLI::Option* opt_config =
      run->add_option("--config", config_path, "INI config file");
  opt_preset->excludes(opt_config);
  run->add_option("--out", out_dir,
                  "output directory (default runs/<preset>)");
  CLI::Option* opt_seed = run->add_option("--seed", seed, "override the seed");
  CLI::Option* opt_threads =
      run->add_option("--threads", threads, "worker threads for the solver");

  CLI::App* list =
      app.add_subcommand("list-presets", "print preset names and summaries");

  CLI11_PARSE(app, argc, argv);

  if (list->parsed()) {
    std::fputs(llg::list_presets_text().c_str(), stdout);
    return 0;
  }

  try {
    llg::ExperimentConfig cfg;
    if (!config_path.empty())
      cfg = llg::load_config_file(config_path);
    else if (!preset.empty())
      cfg = llg::preset_config(preset);
    else
      throw std::runtime_error("run: need --preset or --config");

    if (opt_seed->count() > 0) cfg.seed = seed;
    if (opt_threads->count() > 0) cfg.threads = threads;
    if (const char* env = std::getenv("LLG_LATTICE_THREADS")) {
      const int n = std::atoi(env);
      if (n >= 1) cfg.threads = n;
    }
    if (out_dir.empty()) out_dir = "runs/" + cfg.preset;

    const llg::RunManifest manifest = llg::run_experiment(cfg, out_dir);
    std::printf("%s: %s (%zu artifacts, manifest %s)\n",
                manifest.preset.c_str(), manifest.status.c_str(),
                manifest.files.size(), manifest.path.c_str());
    return manifest.status == "ok" ? 0 : 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
