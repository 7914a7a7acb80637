// Preset construction, experiment execution over (variant, seed) pairs, and
// the comparison summaries over previously written run CSVs.
#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <thread>

#include "pgic/errors.hpp"
#include "pgic/experiments.hpp"

namespace fs = std::filesystem;

namespace pgic {
namespace {

Scenario bench_scenario(double upsilon) {
  Scenario s;
  s.name = "bench4";
  s.cfg.users = 4;
  s.cfg.channels = 4;
  s.cfg.noise = Eigen::MatrixXd::Constant(4, 4, 0.025);
  s.cfg.p_max = Eigen::VectorXd::Constant(4, 40.0);
  s.cfg.mask = Eigen::MatrixXd::Constant(4, 4, kInf);
  Eigen::MatrixXd m = Eigen::MatrixXd::Constant(4, 4, 0.75);
  m.diagonal().setConstant(15.0);
  s.dist.mean.assign(4, m);
  s.dist.upsilon = upsilon;
  return s;
}

std::vector<uint64_t> seed_range(uint64_t lo, uint64_t hi) {
  std::vector<uint64_t> out;
  for (uint64_t s = lo; s <= hi; ++s) out.push_back(s);
  return out;
}

ChannelDistribution with_upsilon(const ChannelDistribution& d, double upsilon) {
  ChannelDistribution out = d;
  out.upsilon = upsilon;
  return out;
}

std::string oracle_header_line(const OracleSettings& o, const NeSolution* ne) {
  std::ostringstream os;
  os << "oracle method="
     << (o.method == NeMethod::mean_channel ? "mean_channel" : "sample_average")
     << " samples=" << o.n_samples << " tol=" << format_real(o.tol)
     << " max_sweeps=" << o.max_sweeps << " seed=" << o.seed;
  if (ne != nullptr)
    os << " residual=" << format_real(ne->residual) << " sweeps=" << ne->sweeps;
  return os.str();
}

std::string run_header_text(const RunVariant& v, const OracleSettings& o,
                            const NeSolution& ne) {
  std::ostringstream os;
  if (v.algorithm == Algorithm::iwfa) {
    os << "order " << (v.order == IwfaOrder::sequential ? "sequential" : "simultaneous")
       << "\n";
  } else {
    os << "schedule " << schedule_token(v.schedules.front()) << "\n";
    for (size_t j = 1; j < v.schedules.size(); ++j) {
      const std::string tok = schedule_token(v.schedules[j]);
      if (tok != schedule_token(v.schedules.front()))
        os << "schedule@" << j << " " << tok << "\n";
    }
    os << "noise " << noise_token(v.noise) << "\n";
  }
  os << oracle_header_line(o, &ne) << "\n";
  return os.str();
}

double median(std::vector<double> v) {
  if (v.empty()) throw ConfigError("median of an empty set");
  std::sort(v.begin(), v.end());
  const size_t m = v.size() / 2;
  return v.size() % 2 == 1 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

void write_text_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << text;
  out.close();
  if (!out) throw IoError("failed writing " + path.string());
}

constexpr const char* kPlotScript = R"PY(#!/usr/bin/env python3
"""Plots pgicsim plotdata.csv: error curves per variant and the first power
trace. Usage: python3 plot.py [plotdata.csv [out_prefix]]"""
import collections
import csv
import sys

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

path = sys.argv[1] if len(sys.argv) > 1 else "plotdata.csv"
prefix = sys.argv[2] if len(sys.argv) > 2 else ""

series = collections.defaultdict(lambda: collections.defaultdict(list))
with open(path, newline="") as fh:
    for row in csv.DictReader(fh):
        key = (row["label"], row["series"])
        series[key][int(row["seed"])].append((int(row["n"]), float(row["value"])))

def plot(kind, fname, ylog):
    fig, ax = plt.subplots(figsize=(7, 4.5))
    drawn = False
    for (label, s), per_seed in sorted(series.items()):
        if s != kind:
            continue
        seed, pts = sorted(per_seed.items())[0]
        pts.sort()
        ax.plot([n for n, _ in pts], [v for _, v in pts], label=f"{label} (seed {seed})")
        drawn = True
    if not drawn:
        plt.close(fig)
        return
    ax.set_xlabel("iteration")
    ax.set_ylabel(kind)
    if ylog:
        ax.set_yscale("log")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(prefix + fname, dpi=150)
    plt.close(fig)

plot("nse", "nse.png", True)
plot("nse_avg", "nse_avg.png", True)
plot("p_0_0", "power.png", False)
print("wrote plots next to", path)
)PY";

}  // namespace

void validate(const ExperimentSpec& spec) {
  validate(spec.scenario.cfg);
  validate(spec.scenario.dist, spec.scenario.cfg);
  if (spec.scenario.name.empty()) throw ConfigError("experiment: scenario needs a name");
  if (spec.iterations < 1) throw ConfigError("experiment: iterations must be at least 1");
  if (spec.seeds.empty()) throw ConfigError("experiment: seeds must be nonempty");
  {
    auto sorted = spec.seeds;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
      throw ConfigError("experiment: duplicate seeds");
  }
  if (spec.variants.empty()) throw ConfigError("experiment: at least one variant required");
  std::vector<std::string> labels;
  for (const auto& v : spec.variants) {
    if (v.label.empty()) throw ConfigError("experiment: variant labels must be nonempty");
    labels.push_back(v.label);
    if (v.algorithm == Algorithm::iwfa) {
      if (!v.schedules.empty())
        throw ConfigError("variant " + v.label + ": water-filling takes no schedule");
      if (v.noise.kind != NoiseModel::Kind::none)
        throw ConfigError("variant " + v.label + ": water-filling takes no noise model");
    } else {
      if (v.schedules.size() != 1 &&
          v.schedules.size() != static_cast<size_t>(spec.scenario.cfg.users))
        throw ConfigError("variant " + v.label + ": schedules must be shared or per-user");
      if (v.schedules.empty())
        throw ConfigError("variant " + v.label + ": missing step schedule");
    }
    if (v.algorithm == Algorithm::sdla_mixed) {
      if (v.switch_at < 1)
        throw ConfigError("variant " + v.label + ": sdla-mixed needs switch_at >= 1");
    } else if (v.switch_at != 0) {
      throw ConfigError("variant " + v.label + ": switch_at only applies to sdla-mixed");
    }
    if (v.upsilon.has_value() && (*v.upsilon < 0.0 || *v.upsilon >= 1.0))
      throw ConfigError("variant " + v.label + ": upsilon must lie in [0, 1)");
  }
  std::sort(labels.begin(), labels.end());
  if (std::adjacent_find(labels.begin(), labels.end()) != labels.end())
    throw ConfigError("experiment: duplicate variant labels");
  if (spec.p0.has_value()) {
    if (spec.p0->rows() != spec.scenario.cfg.users ||
        spec.p0->cols() != spec.scenario.cfg.channels)
      throw ConfigError("experiment: p0 has the wrong shape");
    if (!PowerProfile{*spec.p0}.in_feasible_set(spec.scenario.cfg))
      throw ConfigError("experiment: p0 is infeasible");
  }
  if (spec.oracle.n_samples < 1) throw ConfigError("experiment: oracle_samples must be >= 1");
  if (!(spec.oracle.tol > 0.0)) throw ConfigError("experiment: oracle_tol must be positive");
  if (spec.oracle.max_sweeps < 1)
    throw ConfigError("experiment: oracle_max_sweeps must be >= 1");
  if (spec.threads < 0) throw ConfigError("experiment: threads must be >= 0");
}

ExperimentSpec preset(const std::string& name) {
  ExperimentSpec spec;
  spec.iterations = 2000;
  spec.seeds = seed_range(0, 19);
  if (name == "fig1") {
    spec.scenario = bench_scenario(0.2);
    spec.variants.push_back({"sdla1-const0.5", Algorithm::sdla1, 0,
                             {StepSchedule::constant(0.5)}, NoiseModel::none(), {},
                             IwfaOrder::sequential});
    spec.variants.push_back(
        {"iwfa", Algorithm::iwfa, 0, {}, NoiseModel::none(), {}, IwfaOrder::sequential});
    return spec;
  }
  if (name == "fig2") {
    spec.scenario = bench_scenario(0.2);
    for (const double a : {0.5, 0.1, 0.01})
      spec.variants.push_back({"const" + format_real(a), Algorithm::sdla1, 0,
                               {StepSchedule::constant(a)}, NoiseModel::none(), {},
                               IwfaOrder::sequential});
    spec.variants.push_back({"harmonic0.5", Algorithm::sdla1, 0,
                             {StepSchedule::harmonic(0.5)}, NoiseModel::none(), {},
                             IwfaOrder::sequential});
    return spec;
  }
  if (name == "fig3") {
    spec.scenario = bench_scenario(0.1);
    for (const int pct : {10, 20, 30, 40, 50})
      spec.variants.push_back({"upsilon" + std::to_string(pct), Algorithm::sdla1, 0,
                               {StepSchedule::constant(0.1)}, NoiseModel::none(),
                               pct / 100.0, IwfaOrder::sequential});
    return spec;
  }
  if (name == "fig4") {
    spec.scenario = bench_scenario(0.3);
    spec.variants.push_back({"sdla1", Algorithm::sdla1, 0, {StepSchedule::constant(0.5)},
                             NoiseModel::none(), {}, IwfaOrder::sequential});
    spec.variants.push_back({"sdla2", Algorithm::sdla2, 0, {StepSchedule::constant(0.5)},
                             NoiseModel::none(), {}, IwfaOrder::sequential});
    spec.variants.push_back({"sdla-mixed100", Algorithm::sdla_mixed, 100,
                             {StepSchedule::constant(0.5)}, NoiseModel::none(), {},
                             IwfaOrder::sequential});
    return spec;
  }
  throw ConfigError("unknown preset '" + name + "' (have fig1, fig2, fig3, fig4)");
}

std::vector<std::string> preset_names() { return {"fig1", "fig2", "fig3", "fig4"}; }

std::string default_out_root() {
  const char* env = std::getenv("PGICSIM_OUT");
  return env != nullptr && *env != '\0' ? env : "out";
}

ExperimentResult run_experiment(const ExperimentSpec& spec, const std::string& out_dir) {
  validate(spec);
  const NetworkConfig& cfg = spec.scenario.cfg;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create " + out_dir + ": " + ec.message());

  // One equilibrium per distinct perturbation level, solved up front.
  std::map<double, NeSolution> oracle_by_upsilon;
  for (const auto& v : spec.variants) {
    const double u = v.upsilon.value_or(spec.scenario.dist.upsilon);
    if (oracle_by_upsilon.count(u) == 0)
      oracle_by_upsilon.emplace(
          u, solve_ne(cfg, with_upsilon(spec.scenario.dist, u), spec.oracle));
  }

  const PowerProfile p0 =
      spec.p0.has_value() ? PowerProfile{*spec.p0} : PowerProfile::uniform(cfg);
  const size_t n_seeds = spec.seeds.size();
  const size_t n_jobs = spec.variants.size() * n_seeds;
  ExperimentResult result;
  result.out_dir = out_dir;
  result.logs.resize(n_jobs);
  result.csv_paths.resize(n_jobs);
  std::vector<long> violations(n_jobs, -1);  // -1: audit not applicable

  for (const auto& v : spec.variants) {
    fs::create_directories(fs::path(out_dir) / v.label, ec);
    if (ec) throw IoError("cannot create output directory for " + v.label);
  }

  const auto run_job = [&](size_t idx) {
    const RunVariant& v = spec.variants[idx / n_seeds];
    const uint64_t seed = spec.seeds[idx % n_seeds];
    const double u = v.upsilon.value_or(spec.scenario.dist.upsilon);
    const ChannelDistribution dist = with_upsilon(spec.scenario.dist, u);
    const NeSolution& ne = oracle_by_upsilon.at(u);
    RunLog log;
    switch (v.algorithm) {
      case Algorithm::sdla1:
        log = run_learner(cfg, dist, p0, spec.iterations, v.schedules, v.noise,
                          Averaging::off, 0, seed, &ne.p_star);
        break;
      case Algorithm::sdla2:
        log = run_learner(cfg, dist, p0, spec.iterations, v.schedules, v.noise,
                          Averaging::from_start, 0, seed, &ne.p_star);
        break;
      case Algorithm::sdla_mixed:
        log = run_learner(cfg, dist, p0, spec.iterations, v.schedules, v.noise,
                          Averaging::from_switch, v.switch_at, seed, &ne.p_star);
        break;
      case Algorithm::iwfa:
        log = iwfa_run(cfg, dist, p0, spec.iterations, v.order, seed, &ne.p_star);
        break;
    }
    log.label = v.label;
    Scenario effective = spec.scenario;
    effective.dist.upsilon = u;
    log.scenario_text = scenario_text(effective);
    log.run_text = run_header_text(v, spec.oracle, ne);
    if (log.has_learner_fields) violations[idx] = annotate_telescoping(log, ne.p_star, -1.0);

    std::ostringstream name;
    name << "seed" << std::setw(3) << std::setfill('0') << seed << ".csv";
    const fs::path csv_path = fs::path(out_dir) / v.label / name.str();
    std::ostringstream body;
    write_run_csv(log, body);
    write_text_file(csv_path, body.str());
    result.csv_paths[idx] = csv_path.string();
    result.logs[idx] = std::move(log);
  };

  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const size_t n_workers =
      std::min(n_jobs, static_cast<size_t>(spec.threads > 0 ? spec.threads : hw));
  if (n_workers <= 1) {
    for (size_t i = 0; i < n_jobs; ++i) run_job(i);
  } else {
    std::atomic<size_t> next{0};
    std::vector<std::exception_ptr> errors(n_workers);
    std::vector<std::thread> workers;
    for (size_t w = 0; w < n_workers; ++w)
      workers.emplace_back([&, w] {
        try {
          for (size_t i = next.fetch_add(1); i < n_jobs; i = next.fetch_add(1)) run_job(i);
        } catch (...) {
          errors[w] = std::current_exception();
          next.store(n_jobs);  // drain remaining work
        }
      });
    for (auto& t : workers) t.join();
    for (const auto& e : errors)
      if (e) std::rethrow_exception(e);
  }

  // Long-format plot data: one row per (run, iteration, series).
  {
    std::ostringstream os;
    os << "label,seed,n,series,value\n";
    for (const auto& log : result.logs) {
      const bool has_star = log.p_star.size() > 0;
      for (const auto& row : log.rows) {
        os << log.label << ',' << log.seed << ',' << row.n << ",p_0_0,"
           << format_real(row.p(0, 0)) << "\n";
        if (has_star)
          os << log.label << ',' << log.seed << ',' << row.n << ",nse,"
             << format_real(row.nse) << "\n";
        if (has_star && log.has_avg)
          os << log.label << ',' << log.seed << ',' << row.n << ",nse_avg,"
             << format_real(row.nse_avg) << "\n";
      }
    }
    write_text_file(fs::path(out_dir) / "plotdata.csv", os.str());
  }
  write_text_file(fs::path(out_dir) / "plot.py", kPlotScript);
  write_text_file(fs::path(out_dir) / "scenario.scn", scenario_text(spec.scenario));
  write_text_file(fs::path(out_dir) / "spec.resolved", spec_text(spec));

  // Diagnostics, one block per distinct perturbation level.
  {
    std::ostringstream os;
    os << "# " << kVersion << " diagnostics\n";
    os << "scenario " << spec.scenario.name << "\n";
    for (const auto& [u, ne] : oracle_by_upsilon) {
      const ChannelDistribution dist = with_upsilon(spec.scenario.dist, u);
      DiagnosticsReport rep;
      rep.gamma = check_gamma_pd(cfg, dist, 200, spec.oracle.seed);
      rep.tau_mean = tau(dist.mean_realization(), cfg);
      rep.lipschitz = estimate_lipschitz(cfg, dist, 200, 32, spec.oracle.seed);
      rep.stable_step = stable_step_bound(rep.gamma.tau_min, rep.lipschitz);
      rep.audit_violations = 0;
      for (size_t i = 0; i < n_jobs; ++i) {
        const RunVariant& v = spec.variants[i / n_seeds];
        if (v.upsilon.value_or(spec.scenario.dist.upsilon) == u && violations[i] > 0)
          rep.audit_violations += violations[i];
      }
      if (rep.gamma.tau_min > 0.0) {
        const PdsResult pds =
            pds_integrate(cfg, dist, p0, 5.0, -1.0,
                          std::min(32, spec.oracle.n_samples), spec.oracle.seed);
        rep.pds_checked = pds.bound_checked;
        rep.pds_slack = pds.slack;
      }
      for (size_t vi = 0; vi < spec.variants.size(); ++vi) {
        const RunVariant& v = spec.variants[vi];
        if (v.upsilon.value_or(spec.scenario.dist.upsilon) != u) continue;
        if (v.algorithm == Algorithm::iwfa) {
          rep.notes.push_back("audit " + v.label + ": skipped (no learner fields)");
          continue;
        }
        long total = 0;
        for (size_t si = 0; si < n_seeds; ++si) {
          const long c = violations[vi * n_seeds + si];
          if (c > 0) total += c;
        }
        rep.notes.push_back("audit " + v.label + ": " + std::to_string(total) +
                            " violations over " + std::to_string(n_seeds) + " seeds");
        double a0 = 0.0;
        for (const auto& s : v.schedules) a0 = std::max(a0, s.at(0));
        if (rep.stable_step > 0.0 && a0 > rep.stable_step)
          rep.notes.push_back("warning: " + v.label + " initial step " + format_real(a0) +
                              " exceeds the certified bound " +
                              format_real(rep.stable_step));
      }
      os << "== upsilon " << format_real(u) << " ==\n" << rep.to_text();
    }
    result.diagnostics = os.str();
    write_text_file(fs::path(out_dir) / "diagnostics.txt", result.diagnostics);
  }
  return result;
}

namespace {

std::string strip_upsilon_line(const std::string& block) {
  std::istringstream is(block);
  std::ostringstream os;
  std::string line;
  while (std::getline(is, line))
    if (line.rfind("upsilon ", 0) != 0) os << line << "\n";
  return os.str();
}

double run_metric_nse_final(const CsvRun& run) {
  if (run.data.empty()) throw IoError(run.path + ": no data rows");
  const int col = run.has_column("nse_avg") ? run.column("nse_avg")
                                            : run.column("nse");
  return run.data.back()[static_cast<size_t>(col)];
}

double run_metric_fluctuation(const CsvRun& run) {
  const int col = run.column("p_0_0");
  const size_t window = 200;
  if (run.data.size() < window)
    throw ConfigError(run.path + ": fluctuation needs at least 200 iterations, have " +
                      std::to_string(run.data.size()));
  double mean = 0.0;
  for (size_t r = run.data.size() - window; r < run.data.size(); ++r)
    mean += run.data[r][static_cast<size_t>(col)];
  mean /= window;
  double var = 0.0;
  for (size_t r = run.data.size() - window; r < run.data.size(); ++r) {
    const double d = run.data[r][static_cast<size_t>(col)] - mean;
    var += d * d;
  }
  return var / window;
}

}  // namespace

std::string compare_dir(const std::string& dir, const std::string& metric) {
  if (metric != "nse_final" && metric != "nse_curve" && metric != "fluctuation")
    throw ConfigError("unknown metric '" + metric +
                      "' (have nse_final, nse_curve, fluctuation)");
  if (!fs::is_directory(dir)) throw IoError(dir + " is not a directory");
  std::vector<std::string> paths;
  for (const auto& entry : fs::recursive_directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const fs::path& p = entry.path();
    if (p.extension() == ".csv" && p.filename() != "plotdata.csv")
      paths.push_back(p.string());
  }
  std::sort(paths.begin(), paths.end());
  if (paths.empty()) throw IoError("no run CSVs under " + dir);

  std::vector<CsvRun> runs;
  runs.reserve(paths.size());
  for (const auto& p : paths) runs.push_back(read_run_csv(p));
  const std::string scenario_ref = strip_upsilon_line(runs.front().scenario_block);
  for (const auto& r : runs) {
    if (strip_upsilon_line(r.scenario_block) != scenario_ref)
      throw ConfigError(r.path + ": scenario differs from " + runs.front().path);
    if (r.oracle_line != runs.front().oracle_line)
      throw ConfigError(r.path + ": oracle settings differ from " + runs.front().path);
  }

  std::map<std::string, std::vector<const CsvRun*>> by_label;
  for (const auto& r : runs) by_label[r.label].push_back(&r);

  std::ostringstream os;
  os << "metric " << metric << "\n";
  if (metric == "nse_curve") {
    std::map<std::string, std::vector<double>> curves;
    for (const auto& [label, group] : by_label) {
      const size_t rows = group.front()->data.size();
      for (const CsvRun* r : group)
        if (r->data.size() != rows)
          throw ConfigError(r->path + ": row count differs within label " + label);
      std::vector<double> curve(rows);
      for (size_t n = 0; n < rows; ++n) {
        std::vector<double> vals;
        vals.reserve(group.size());
        for (const CsvRun* r : group) {
          const int col =
              r->has_column("nse_avg") ? r->column("nse_avg") : r->column("nse");
          vals.push_back(r->data[n][static_cast<size_t>(col)]);
        }
        curve[n] = median(vals);
      }
      const int ncol = group.front()->column("n");
      for (size_t n = 0; n < rows; ++n)
        os << "curve " << label << " n "
           << static_cast<long>(group.front()->data[n][static_cast<size_t>(ncol)])
           << " median " << format_real(curve[n]) << "\n";
      curves.emplace(label, std::move(curve));
    }
    for (auto a = curves.begin(); a != curves.end(); ++a)
      for (auto b = std::next(a); b != curves.end(); ++b) {
        double gap = 0.0;
        const size_t rows = std::min(a->second.size(), b->second.size());
        for (size_t n = 0; n < rows; ++n)
          gap = std::max(gap, std::abs(a->second[n] - b->second[n]));
        os << "diff " << a->first << " " << b->first << " max_abs_gap "
           << format_real(gap) << "\n";
      }
    return os.str();
  }

  std::map<std::string, double> medians;
  for (const auto& [label, group] : by_label) {
    std::vector<double> vals;
    vals.reserve(group.size());
    for (const CsvRun* r : group)
      vals.push_back(metric == "nse_final" ? run_metric_nse_final(*r)
                                           : run_metric_fluctuation(*r));
    const double med = median(vals);
    os << "label " << label << " median " << format_real(med) << " seeds "
       << group.size() << "\n";
    medians.emplace(label, med);
  }
  for (auto a = medians.begin(); a != medians.end(); ++a)
    for (auto b = std::next(a); b != medians.end(); ++b)
      os << "diff " << a->first << " " << b->first << " "
         << format_real(a->second - b->second) << "\n";
  return os.str();
}

}  // namespace pgic
