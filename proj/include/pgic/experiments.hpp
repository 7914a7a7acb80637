// Experiment orchestration: named presets, scenario and spec files, seeded
// multi-run execution with CSV / plot-data / diagnostics emission, and the
// cross-run comparison summaries used by the command-line driver.
#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "pgic/analysis.hpp"
#include "pgic/learners.hpp"
#include "pgic/types.hpp"

namespace pgic {

inline constexpr const char* kVersion = "pgicsim 0.1.0";

// A named network instance plus the gain distribution it draws from.
struct Scenario {
  std::string name;
  NetworkConfig cfg;
  ChannelDistribution dist;
};

enum class Algorithm { sdla1, sdla2, sdla_mixed, iwfa };

std::string to_string(Algorithm a);
Algorithm algorithm_from_string(const std::string& s);

// One algorithm/schedule/noise combination, executed once per seed.
struct RunVariant {
  std::string label;
  Algorithm algorithm = Algorithm::sdla1;
  long switch_at = 0;                    // sdla_mixed: last raw-iterate step
  std::vector<StepSchedule> schedules;   // one shared entry or one per user
  NoiseModel noise;
  std::optional<double> upsilon;         // per-variant perturbation override
  IwfaOrder order = IwfaOrder::sequential;
};

struct ExperimentSpec {
  Scenario scenario;
  std::vector<RunVariant> variants;
  long iterations = 2000;
  std::vector<uint64_t> seeds;
  OracleSettings oracle;
  std::optional<Eigen::MatrixXd> p0;     // default: uniform budget split
  int threads = 0;                       // 0 picks the hardware concurrency
};

// Throws ConfigError on empty seeds, duplicate labels, bad schedule counts,
// missing switch points, or an infeasible p0.
void validate(const ExperimentSpec& spec);

// Named configurations of the benchmark network (4 users, 4 channels, direct
// gain 15, cross gain 0.75, noise 0.025, budget 40):
//   fig1: perturbation 0.2, constant step 0.5, raw learner vs water-filling
//   fig2: perturbation 0.2, constant steps {0.5, 0.1, 0.01} and harmonic 0.5
//   fig3: constant step 0.1, perturbation swept over {0.1, 0.2, 0.3, 0.4, 0.5}
//   fig4: perturbation 0.3, constant step 0.5, raw vs averaged vs switched
ExperimentSpec preset(const std::string& name);
std::vector<std::string> preset_names();

// Round-trip token forms shared by spec files and run CSV headers.
std::string schedule_token(const StepSchedule& s);
StepSchedule parse_schedule_token(const std::string& tok);
std::string noise_token(const NoiseModel& n);
NoiseModel parse_noise_token(const std::string& tok);
std::string format_real(double v);  // shortest exact decimal form, "inf" aware

// Canonical text forms. Parsing the canonical text reproduces the value
// exactly; the writers emit the shortest decimal form that parses back to the
// same double, and LF line endings.
std::string scenario_text(const Scenario& s);
Scenario parse_scenario_text(const std::string& text);
Scenario read_scenario_file(const std::string& path);

std::string spec_text(const ExperimentSpec& spec);
ExperimentSpec parse_spec_text(const std::string& text, const std::string& base_dir);
ExperimentSpec read_spec_file(const std::string& path);

// Expands seed tokens: each is either an integer or an inclusive "lo..hi".
std::vector<uint64_t> expand_seed_tokens(const std::vector<std::string>& tokens);

// Per-run CSV: '#' header lines (version, run metadata, schedule, noise,
// oracle, canonical scenario block, equilibrium and initial profiles), one
// column-name row, then one data row per iteration.
void write_run_csv(const RunLog& log, std::ostream& os);

// The parts of a run CSV the audit and comparison tools consume.
struct CsvRun {
  std::string path;
  std::string label;
  std::string algorithm;
  uint64_t seed = 0;
  std::string scenario_block;          // canonical scenario text
  std::string oracle_line;             // settings only, no residual
  Eigen::MatrixXd p_star;              // empty when the run had no oracle
  std::vector<std::string> columns;
  std::vector<std::vector<double>> data;

  bool has_column(const std::string& name) const;
  int column(const std::string& name) const;  // throws IoError when absent
};

CsvRun read_run_csv(const std::string& path);

// Counts rows whose logged squared distance exceeds the logged telescoping
// bound by more than tol. Throws IoError when the columns are missing.
long audit_csv(const CsvRun& run, double tol = 1e-12);

struct ExperimentResult {
  std::vector<RunLog> logs;                // variant-major, then seed order
  std::vector<std::string> csv_paths;      // same order as logs
  std::string out_dir;
  std::string diagnostics;
};

// Solves the equilibrium once per distinct perturbation level, runs every
// (variant, seed) pair, and writes per-run CSVs, plotdata.csv, plot.py,
// diagnostics.txt, scenario.scn, and spec.resolved under out_dir.
ExperimentResult run_experiment(const ExperimentSpec& spec, const std::string& out_dir);

// Default output root: $PGICSIM_OUT when set, "./out" otherwise.
std::string default_out_root();

// Comparison summary over the run CSVs found under dir (recursively).
//   nse_final:   error of the reported iterate on the last row, median by label
//   nse_curve:   per-iteration median error curve by label
//   fluctuation: variance of p_0_0 over the final 200 rows, median by label
// Scalar metrics also emit pairwise difference rows; curves emit the pairwise
// maximum absolute gap. Throws ConfigError when the logs mix scenarios (the
// perturbation level may differ) and IoError when no run CSVs are found.
std::string compare_dir(const std::string& dir, const std::string& metric);

}  // namespace pgic
