// randgreen: reproducible experiments on random Green measures of driven
// sequences of holomorphic endomorphisms of P^k.
//
//   randgreen <experiment> --config <path> [--seed N] [--out <path>]
//   randgreen plotdata --in <records.csv>... (reshapes an in-memory rerun)
//
// Flags override config fields of the same name.  RANDGREEN_THREADS caps the
// worker pool.  Exit codes: 0 success, 2 flagged-but-completed, 1 hard error.

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <sstream>

#include "randgreen/experiment.hpp"
#include "randgreen/version.hpp"

namespace {

std::string slurp(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot read config: " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"random Green measure laboratory"};
  app.set_version_flag("--version", randgreen::kVersion);
  app.require_subcommand(1);

  std::string config_path, out_override, series;
  std::optional<std::uint64_t> seed_override;

  std::vector<CLI::App*> subs;
  for (const auto& name : randgreen::experiment_names()) {
    CLI::App* sub = app.add_subcommand(name, "run the " + name + " experiment");
    sub->add_option("--config", config_path, "experiment configuration (JSON)")->required();
    sub->add_option("--seed", seed_override, "override the config seed");
    sub->add_option("--out", out_override, "override the config output_path");
    subs.push_back(sub);
  }

  CLI::App* plot = app.add_subcommand("plotdata", "reshape records into plot series");
  plot->add_option("--config", config_path, "config of the run to reshape")->required();
  plot->add_option("--series", series, "estimator prefix to select");
  plot->add_option("--out", out_override, "plot CSV path")->required();
  plot->add_option("--seed", seed_override, "override the config seed");

  CLI11_PARSE(app, argc, argv);

  try {
    randgreen::ExperimentConfig cfg = randgreen::parse_config(slurp(config_path));
    if (seed_override) cfg.seed = *seed_override;

    if (plot->parsed()) {
      const auto res = randgreen::run_experiment(cfg);
      const auto rows = randgreen::emit_plotdata(res.records, series);
      randgreen::write_plotdata_csv(rows, out_override);
      std::cerr << "plotdata: " << rows.size() << " rows -> " << out_override << "\n";
      return 0;
    }

    const std::string sub = app.get_subcommands().front()->get_name();
    if (cfg.experiment != sub) {
      std::cerr << "error: config names experiment '" << cfg.experiment
                << "' but the subcommand is '" << sub << "'\n";
      return 1;
    }
    if (!out_override.empty()) cfg.output_path = out_override;

    const auto res = randgreen::run_experiment(cfg);
    randgreen::write_outputs(cfg, res);
    std::cerr << cfg.experiment << ": " << res.records.size() << " records -> "
              << cfg.output_path << "  (" << res.wall_seconds << " s, "
              << randgreen::worker_count() << " threads)\n";
    return res.exit_code;
  } catch (const randgreen::SchemaError& e) {
    std::cerr << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
