// Command-line driver: run experiments from presets or spec files, solve the
// equilibrium of a scenario file, audit logged runs against the telescoping
// bound, and compare run directories.
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "pgic/errors.hpp"
#include "pgic/experiments.hpp"

namespace {

std::vector<std::string> split_commas(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',' || c == ' ') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stochastic power-allocation learning on parallel interference channels"};
  app.set_version_flag("--version", std::string(pgic::kVersion));
  app.require_subcommand(1);

  auto* run_cmd = app.add_subcommand("run", "Execute an experiment and write CSV output");
  std::string preset_name, spec_path, seeds_arg, out_dir;
  long iterations = -1;
  int threads = -1;
  auto* preset_opt = run_cmd->add_option("--preset", preset_name,
                                         "Built-in configuration (fig1, fig2, fig3, fig4)");
  auto* spec_opt = run_cmd->add_option("--spec", spec_path, "Experiment spec file");
  preset_opt->excludes(spec_opt);
  run_cmd->add_option("--seeds", seeds_arg,
                      "Seed list, e.g. 0..19 or 3,5,8 (overrides the spec)");
  run_cmd->add_option("--iterations", iterations, "Iteration count (overrides the spec)");
  run_cmd->add_option("--out", out_dir, "Output directory (default $PGICSIM_OUT or ./out)");
  run_cmd->add_option("--threads", threads, "Worker threads (0 = hardware concurrency)");

  auto* oracle_cmd =
      app.add_subcommand("oracle", "Solve the equilibrium of a scenario file");
  std::string scenario_path, method = "sample_average";
  int samples = 2000, max_sweeps = 2000;
  double tol = 1e-8;
  uint64_t oracle_seed = 777;
  oracle_cmd->add_option("--scenario", scenario_path, "Scenario file")->required();
  oracle_cmd->add_option("--samples", samples, "Frozen pool size");
  oracle_cmd->add_option("--method", method, "mean_channel or sample_average");
  oracle_cmd->add_option("--tol", tol, "Best-response convergence tolerance");
  oracle_cmd->add_option("--max-sweeps", max_sweeps, "Best-response sweep limit");
  oracle_cmd->add_option("--seed", oracle_seed, "Pool seed");

  auto* audit_cmd =
      app.add_subcommand("audit", "Check a run CSV against its logged distance bound");
  std::string log_path;
  double audit_tol = 1e-12;
  audit_cmd->add_option("--log", log_path, "Run CSV written by 'run'")->required();
  audit_cmd->add_option("--tol", audit_tol, "Violation slack");

  auto* compare_cmd =
      app.add_subcommand("compare", "Summarize run CSVs under a directory by label");
  std::string dir, metric = "nse_final";
  compare_cmd->add_option("--dir", dir, "Directory holding run CSVs")->required();
  compare_cmd->add_option("--metric", metric, "nse_final, nse_curve, or fluctuation");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (run_cmd->parsed()) {
      if (preset_name.empty() && spec_path.empty())
        throw pgic::ConfigError("run: give --preset or --spec");
      pgic::ExperimentSpec spec = !preset_name.empty() ? pgic::preset(preset_name)
                                                       : pgic::read_spec_file(spec_path);
      if (!seeds_arg.empty()) spec.seeds = pgic::expand_seed_tokens(split_commas(seeds_arg));
      if (iterations >= 0) spec.iterations = iterations;
      if (threads >= 0) spec.threads = threads;
      if (out_dir.empty()) {
        const std::string stem = !preset_name.empty()
                                     ? preset_name
                                     : std::filesystem::path(spec_path).stem().string();
        out_dir = pgic::default_out_root() + "/" + stem;
      }
      const pgic::ExperimentResult result = pgic::run_experiment(spec, out_dir);
      std::cout << "wrote " << result.csv_paths.size() << " run CSVs under "
                << result.out_dir << "\n";
      std::cout << "diagnostics: " << result.out_dir << "/diagnostics.txt\n";
      std::cout << "plot data:   " << result.out_dir << "/plotdata.csv\n";
      return 0;
    }
    if (oracle_cmd->parsed()) {
      const pgic::Scenario scn = pgic::read_scenario_file(scenario_path);
      pgic::OracleSettings settings;
      if (method == "mean_channel")
        settings.method = pgic::NeMethod::mean_channel;
      else if (method == "sample_average")
        settings.method = pgic::NeMethod::sample_average;
      else
        throw pgic::ConfigError("unknown oracle method '" + method + "'");
      settings.n_samples = samples;
      settings.tol = tol;
      settings.max_sweeps = max_sweeps;
      settings.seed = oracle_seed;
      const pgic::NeSolution ne = pgic::solve_ne(scn.cfg, scn.dist, settings);
      std::cout << "# " << pgic::kVersion << "\n";
      std::cout << "scenario " << scn.name << " method " << method << " samples "
                << samples << " seed " << oracle_seed << "\n";
      std::cout << "residual " << pgic::format_real(ne.residual) << " sweeps " << ne.sweeps
                << "\n";
      for (int j = 0; j < scn.cfg.users; ++j) {
        std::cout << "pstar " << j;
        for (int k = 0; k < scn.cfg.channels; ++k)
          std::cout << ' ' << pgic::format_real(ne.p_star(j, k));
        std::cout << "\n";
      }
      return 0;
    }
    if (audit_cmd->parsed()) {
      const pgic::CsvRun run = pgic::read_run_csv(log_path);
      const long violations = pgic::audit_csv(run, audit_tol);
      std::cout << "rows " << run.data.size() << " violations " << violations << "\n";
      return 0;
    }
    if (compare_cmd->parsed()) {
      std::cout << pgic::compare_dir(dir, metric);
      return 0;
    }
  } catch (const pgic::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const pgic::OracleError& e) {
    std::cerr << "oracle error: " << e.what() << "\n";
    return 3;
  } catch (const pgic::IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
