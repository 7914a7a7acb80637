// Text formats: canonical scenario blocks, experiment spec files, the per-run
// CSV writer, and the CSV reader backing the audit and compare tools.
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "pgic/errors.hpp"
#include "pgic/experiments.hpp"

namespace pgic {
namespace {

std::string fmt(double v) {
  if (std::isinf(v)) return v > 0.0 ? "inf" : "-inf";
  // Shortest decimal form that parses back to the same double, so canonical
  // text both round-trips exactly and keeps human-entered values readable.
  char buf[64];
  for (int prec = 15; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

std::vector<std::string> split_ws(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream is(line);
  std::string tok;
  while (is >> tok) out.push_back(tok);
  return out;
}

std::vector<std::string> split_on(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

double parse_num(const std::string& tok, const std::string& what) {
  if (tok == "inf") return kInf;
  if (tok == "-inf") return -kInf;
  try {
    size_t pos = 0;
    const double v = std::stod(tok, &pos);
    if (pos != tok.size()) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("cannot parse number '" + tok + "' in " + what);
  }
}

long parse_int(const std::string& tok, const std::string& what) {
  try {
    size_t pos = 0;
    const long v = std::stol(tok, &pos);
    if (pos != tok.size()) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("cannot parse integer '" + tok + "' in " + what);
  }
}

bool valid_name(const std::string& s) {
  if (s.empty()) return false;
  return std::all_of(s.begin(), s.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.';
  });
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace

// ---- schedule / noise tokens (round-trip with parse) ----------------------

std::string format_real(double v) { return fmt(v); }

std::string schedule_token(const StepSchedule& s) {
  switch (s.kind) {
    case StepSchedule::Kind::constant:
      return "constant:" + fmt(s.a0);
    case StepSchedule::Kind::harmonic:
      return "harmonic:" + fmt(s.a0);
    case StepSchedule::Kind::shifted_harmonic:
      return "shifted:" + fmt(s.a0) + ":" + fmt(s.n0);
    case StepSchedule::Kind::custom: {
      std::string out = "custom:";
      for (size_t i = 0; i < s.values.size(); ++i) {
        if (i) out += ',';
        out += fmt(s.values[i]);
      }
      return out;
    }
  }
  throw ConfigError("unknown schedule kind");
}

StepSchedule parse_schedule_token(const std::string& tok) {
  const auto parts = split_on(tok, ':');
  const std::string& kind = parts[0];
  const std::string where = "schedule '" + tok + "'";
  if (kind == "constant" || kind == "harmonic") {
    if (parts.size() != 2) throw ConfigError(where + ": expected one parameter");
    const double a0 = parse_num(parts[1], where);
    return kind == "constant" ? StepSchedule::constant(a0) : StepSchedule::harmonic(a0);
  }
  if (kind == "shifted") {
    if (parts.size() != 3) throw ConfigError(where + ": expected two parameters");
    return StepSchedule::shifted_harmonic(parse_num(parts[1], where),
                                          parse_num(parts[2], where));
  }
  if (kind == "custom") {
    if (parts.size() != 2) throw ConfigError(where + ": expected a value list");
    std::vector<double> values;
    for (const auto& v : split_on(parts[1], ',')) values.push_back(parse_num(v, where));
    return StepSchedule::custom(std::move(values));
  }
  throw ConfigError(where + ": unknown kind '" + kind + "'");
}

std::string noise_token(const NoiseModel& n) {
  switch (n.kind) {
    case NoiseModel::Kind::none:
      return "none";
    case NoiseModel::Kind::theta:
      return "theta:" + fmt(n.sigma);
    case NoiseModel::Kind::bias:
      return "bias:" + fmt(n.bias0) + ":" + fmt(n.bias_pow);
  }
  throw ConfigError("unknown noise kind");
}

NoiseModel parse_noise_token(const std::string& tok) {
  const auto parts = split_on(tok, ':');
  const std::string where = "noise '" + tok + "'";
  if (parts[0] == "none") {
    if (parts.size() != 1) throw ConfigError(where + ": takes no parameters");
    return NoiseModel::none();
  }
  if (parts[0] == "theta") {
    if (parts.size() != 2) throw ConfigError(where + ": expected a sigma");
    return NoiseModel::theta(parse_num(parts[1], where));
  }
  if (parts[0] == "bias") {
    if (parts.size() < 2 || parts.size() > 3) throw ConfigError(where + ": expected 1-2 parameters");
    const double b0 = parse_num(parts[1], where);
    const double pw = parts.size() == 3 ? parse_num(parts[2], where) : 1.0;
    return NoiseModel::bias(b0, pw);
  }
  throw ConfigError(where + ": unknown kind '" + parts[0] + "'");
}

// ---- scenario parsing state ------------------------------------------------

namespace {

struct ScenarioBuilder {
  Scenario s;
  bool has_name = false, has_users = false, has_channels = false, has_upsilon = false;
  bool has_pmax = false;
  std::vector<bool> noise_rows, mask_rows;
  std::vector<std::vector<bool>> gain_rows;  // [channel][row]
  bool touched = false;

  void require_dims(const std::string& kw) const {
    if (!has_users || !has_channels)
      throw ConfigError("'" + kw + "' before 'users'/'channels'");
  }

  // Returns true when the keyword belongs to the scenario grammar.
  bool consume(const std::vector<std::string>& t, const std::string& where) {
    const std::string& kw = t[0];
    if (kw == "scenario") {
      if (t.size() != 2 || !valid_name(t[1]))
        throw ConfigError(where + ": 'scenario' wants one name of [A-Za-z0-9_.-]");
      s.name = t[1];
      has_name = touched = true;
      return true;
    }
    if (kw == "users" || kw == "channels") {
      if (t.size() != 2) throw ConfigError(where + ": '" + kw + "' wants one integer");
      const long v = parse_int(t[1], where);
      if (v < 1) throw ConfigError(where + ": '" + kw + "' must be at least 1");
      (kw == "users" ? s.cfg.users : s.cfg.channels) = static_cast<int>(v);
      (kw == "users" ? has_users : has_channels) = true;
      touched = true;
      if (has_users && has_channels) {
        const int N = s.cfg.users, K = s.cfg.channels;
        s.cfg.noise = Eigen::MatrixXd::Zero(N, K);
        s.cfg.p_max = Eigen::VectorXd::Zero(N);
        s.cfg.mask = Eigen::MatrixXd::Constant(N, K, kInf);
        s.dist.mean.assign(static_cast<size_t>(K), Eigen::MatrixXd::Zero(N, N));
        noise_rows.assign(static_cast<size_t>(N), false);
        mask_rows.assign(static_cast<size_t>(N), false);
        gain_rows.assign(static_cast<size_t>(K),
                         std::vector<bool>(static_cast<size_t>(N), false));
      }
      return true;
    }
    if (kw == "upsilon") {
      if (t.size() != 2) throw ConfigError(where + ": 'upsilon' wants one number");
      s.dist.upsilon = parse_num(t[1], where);
      has_upsilon = touched = true;
      return true;
    }
    if (kw == "p_max") {
      require_dims(kw);
      if (static_cast<int>(t.size()) != 1 + s.cfg.users)
        throw ConfigError(where + ": 'p_max' wants one value per user");
      for (int j = 0; j < s.cfg.users; ++j) s.cfg.p_max(j) = parse_num(t[1 + j], where);
      has_pmax = touched = true;
      return true;
    }
    if (kw == "noise" || kw == "mask") {
      require_dims(kw);
      if (static_cast<int>(t.size()) != 2 + s.cfg.channels)
        throw ConfigError(where + ": '" + kw + "' wants a user index and one value per channel");
      const long j = parse_int(t[1], where);
      if (j < 0 || j >= s.cfg.users) throw ConfigError(where + ": user index out of range");
      for (int k = 0; k < s.cfg.channels; ++k) {
        const double v = parse_num(t[2 + k], where);
        (kw == "noise" ? s.cfg.noise : s.cfg.mask)(j, k) = v;
      }
      (kw == "noise" ? noise_rows : mask_rows)[static_cast<size_t>(j)] = true;
      touched = true;
      return true;
    }
    if (kw == "gain") {
      require_dims(kw);
      if (static_cast<int>(t.size()) != 3 + s.cfg.users)
        throw ConfigError(where +
                          ": 'gain' wants channel, receiver row, then one value per transmitter");
      const long k = parse_int(t[1], where);
      const long j = parse_int(t[2], where);
      if (k < 0 || k >= s.cfg.channels) throw ConfigError(where + ": channel index out of range");
      if (j < 0 || j >= s.cfg.users) throw ConfigError(where + ": receiver index out of range");
      for (int i = 0; i < s.cfg.users; ++i)
        s.dist.mean[static_cast<size_t>(k)](j, i) = parse_num(t[3 + i], where);
      gain_rows[static_cast<size_t>(k)][static_cast<size_t>(j)] = true;
      touched = true;
      return true;
    }
    return false;
  }

  Scenario finish(const std::string& what) const {
    if (!has_name) throw ConfigError(what + ": missing 'scenario' name line");
    if (!has_users || !has_channels) throw ConfigError(what + ": missing 'users'/'channels'");
    if (!has_upsilon) throw ConfigError(what + ": missing 'upsilon'");
    if (!has_pmax) throw ConfigError(what + ": missing 'p_max'");
    const auto all = [](const std::vector<bool>& v) {
      return std::all_of(v.begin(), v.end(), [](bool b) { return b; });
    };
    if (!all(noise_rows)) throw ConfigError(what + ": missing 'noise' rows");
    if (!all(mask_rows)) throw ConfigError(what + ": missing 'mask' rows");
    for (const auto& ch : gain_rows)
      if (!all(ch)) throw ConfigError(what + ": missing 'gain' rows");
    validate(s.cfg);
    validate(s.dist, s.cfg);
    return s;
  }
};

}  // namespace

std::string to_string(Algorithm a) {
  switch (a) {
    case Algorithm::sdla1: return "sdla1";
    case Algorithm::sdla2: return "sdla2";
    case Algorithm::sdla_mixed: return "sdla-mixed";
    case Algorithm::iwfa: return "iwfa";
  }
  throw ConfigError("unknown algorithm");
}

Algorithm algorithm_from_string(const std::string& s) {
  if (s == "sdla1") return Algorithm::sdla1;
  if (s == "sdla2") return Algorithm::sdla2;
  if (s == "sdla-mixed") return Algorithm::sdla_mixed;
  if (s == "iwfa") return Algorithm::iwfa;
  throw ConfigError("unknown algorithm '" + s + "'");
}

std::string scenario_text(const Scenario& s) {
  std::ostringstream os;
  os << "scenario " << s.name << "\n";
  os << "users " << s.cfg.users << "\n";
  os << "channels " << s.cfg.channels << "\n";
  os << "upsilon " << fmt(s.dist.upsilon) << "\n";
  os << "p_max";
  for (int j = 0; j < s.cfg.users; ++j) os << ' ' << fmt(s.cfg.p_max(j));
  os << "\n";
  for (int j = 0; j < s.cfg.users; ++j) {
    os << "noise " << j;
    for (int k = 0; k < s.cfg.channels; ++k) os << ' ' << fmt(s.cfg.noise(j, k));
    os << "\n";
  }
  for (int j = 0; j < s.cfg.users; ++j) {
    os << "mask " << j;
    for (int k = 0; k < s.cfg.channels; ++k) os << ' ' << fmt(s.cfg.mask(j, k));
    os << "\n";
  }
  for (int k = 0; k < s.cfg.channels; ++k) {
    for (int j = 0; j < s.cfg.users; ++j) {
      os << "gain " << k << ' ' << j;
      for (int i = 0; i < s.cfg.users; ++i)
        os << ' ' << fmt(s.dist.mean[static_cast<size_t>(k)](j, i));
      os << "\n";
    }
  }
  return os.str();
}

Scenario parse_scenario_text(const std::string& text) {
  ScenarioBuilder b;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto t = split_ws(line);
    if (t.empty() || t[0][0] == '#') continue;
    const std::string where = "scenario line " + std::to_string(lineno);
    if (!b.consume(t, where))
      throw ConfigError(where + ": unknown keyword '" + t[0] + "'");
  }
  return b.finish("scenario");
}

Scenario read_scenario_file(const std::string& path) {
  try {
    return parse_scenario_text(read_text_file(path));
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

// ---- experiment specs ------------------------------------------------------

std::string spec_text(const ExperimentSpec& spec) {
  std::ostringstream os;
  os << scenario_text(spec.scenario);
  os << "iterations " << spec.iterations << "\n";
  os << "seeds";
  for (uint64_t s : spec.seeds) os << ' ' << s;
  os << "\n";
  os << "oracle_method "
     << (spec.oracle.method == NeMethod::mean_channel ? "mean_channel" : "sample_average")
     << "\n";
  os << "oracle_samples " << spec.oracle.n_samples << "\n";
  os << "oracle_tol " << fmt(spec.oracle.tol) << "\n";
  os << "oracle_max_sweeps " << spec.oracle.max_sweeps << "\n";
  os << "oracle_seed " << spec.oracle.seed << "\n";
  os << "threads " << spec.threads << "\n";
  if (spec.p0.has_value()) {
    for (int j = 0; j < spec.scenario.cfg.users; ++j) {
      os << "p0_row " << j;
      for (int k = 0; k < spec.scenario.cfg.channels; ++k) os << ' ' << fmt((*spec.p0)(j, k));
      os << "\n";
    }
  } else {
    os << "p0 uniform\n";
  }
  for (const auto& v : spec.variants) {
    os << "variant label=" << v.label << " alg=" << to_string(v.algorithm);
    if (v.algorithm == Algorithm::sdla_mixed) os << " switch_at=" << v.switch_at;
    if (v.algorithm == Algorithm::iwfa) {
      os << " order=" << (v.order == IwfaOrder::sequential ? "sequential" : "simultaneous");
    } else {
      os << " schedule=" << schedule_token(v.schedules.front());
      if (v.schedules.size() > 1) {
        const std::string base = schedule_token(v.schedules.front());
        for (size_t j = 1; j < v.schedules.size(); ++j) {
          const std::string tok = schedule_token(v.schedules[j]);
          if (tok != base) os << " schedule@" << j << "=" << tok;
        }
      }
      os << " noise=" << noise_token(v.noise);
    }
    if (v.upsilon.has_value()) os << " upsilon=" << fmt(*v.upsilon);
    os << "\n";
  }
  return os.str();
}

namespace {

RunVariant parse_variant_tokens(const std::vector<std::string>& t, int users,
                                const std::string& where) {
  RunVariant v;
  bool has_label = false, has_alg = false, has_switch = false, has_order = false;
  std::string base_schedule;
  std::vector<std::pair<long, std::string>> overrides;
  for (size_t i = 1; i < t.size(); ++i) {
    const auto eq = t[i].find('=');
    if (eq == std::string::npos)
      throw ConfigError(where + ": expected key=value, got '" + t[i] + "'");
    const std::string key = t[i].substr(0, eq);
    const std::string val = t[i].substr(eq + 1);
    if (key == "label") {
      if (!valid_name(val))
        throw ConfigError(where + ": label must be nonempty [A-Za-z0-9_.-]");
      v.label = val;
      has_label = true;
    } else if (key == "alg") {
      v.algorithm = algorithm_from_string(val);
      has_alg = true;
    } else if (key == "switch_at") {
      v.switch_at = parse_int(val, where);
      has_switch = true;
    } else if (key == "schedule") {
      base_schedule = val;
    } else if (key.rfind("schedule@", 0) == 0) {
      overrides.emplace_back(parse_int(key.substr(9), where), val);
    } else if (key == "noise") {
      v.noise = parse_noise_token(val);
    } else if (key == "upsilon") {
      v.upsilon = parse_num(val, where);
    } else if (key == "order") {
      if (val == "sequential")
        v.order = IwfaOrder::sequential;
      else if (val == "simultaneous")
        v.order = IwfaOrder::simultaneous;
      else
        throw ConfigError(where + ": unknown order '" + val + "'");
      has_order = true;
    } else {
      throw ConfigError(where + ": unknown key '" + key + "'");
    }
  }
  if (!has_label) throw ConfigError(where + ": missing label=");
  if (!has_alg) throw ConfigError(where + ": missing alg=");
  if (v.algorithm == Algorithm::iwfa) {
    if (!base_schedule.empty() || !overrides.empty())
      throw ConfigError(where + ": water-filling takes no schedule");
    if (v.noise.kind != NoiseModel::Kind::none)
      throw ConfigError(where + ": water-filling takes no noise model");
    if (has_switch) throw ConfigError(where + ": switch_at only applies to sdla-mixed");
    return v;
  }
  if (has_order) throw ConfigError(where + ": order only applies to iwfa");
  if (v.algorithm == Algorithm::sdla_mixed) {
    if (!has_switch || v.switch_at < 1)
      throw ConfigError(where + ": sdla-mixed needs switch_at >= 1");
  } else if (has_switch) {
    throw ConfigError(where + ": switch_at only applies to sdla-mixed");
  }
  if (base_schedule.empty()) throw ConfigError(where + ": missing schedule=");
  v.schedules = {parse_schedule_token(base_schedule)};
  if (!overrides.empty()) {
    v.schedules.assign(static_cast<size_t>(users), v.schedules.front());
    for (const auto& [j, tok] : overrides) {
      if (j < 0 || j >= users) throw ConfigError(where + ": schedule@ user index out of range");
      v.schedules[static_cast<size_t>(j)] = parse_schedule_token(tok);
    }
  }
  return v;
}

}  // namespace

ExperimentSpec parse_spec_text(const std::string& text, const std::string& base_dir) {
  ExperimentSpec spec;
  ScenarioBuilder inline_scenario;
  bool from_preset = false, from_file = false, preset_variants_replaced = false;
  bool has_iterations = false, has_seeds = false;
  std::vector<std::pair<long, Eigen::VectorXd>> p0_rows;
  bool p0_uniform = false;
  std::vector<std::vector<std::string>> variant_lines;
  std::vector<std::string> variant_where;

  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  bool any_directive = false;
  while (std::getline(is, line)) {
    ++lineno;
    const auto t = split_ws(line);
    if (t.empty() || t[0][0] == '#') continue;
    const std::string where = "spec line " + std::to_string(lineno);
    const std::string& kw = t[0];
    if (kw == "preset") {
      if (t.size() != 2) throw ConfigError(where + ": 'preset' wants one name");
      if (any_directive)
        throw ConfigError(where + ": 'preset' must be the first directive");
      const ExperimentSpec base = preset(t[1]);
      spec.scenario = base.scenario;
      spec.variants = base.variants;
      if (!has_iterations) spec.iterations = base.iterations;
      if (!has_seeds) spec.seeds = base.seeds;
      spec.oracle = base.oracle;
      from_preset = true;
      any_directive = true;
      continue;
    }
    any_directive = true;
    if (kw == "scenario_file") {
      if (t.size() != 2) throw ConfigError(where + ": 'scenario_file' wants one path");
      if (from_preset || inline_scenario.touched)
        throw ConfigError(where + ": 'scenario_file' conflicts with another scenario source");
      const std::filesystem::path p(t[1]);
      spec.scenario = read_scenario_file(
          p.is_absolute() ? p.string() : (std::filesystem::path(base_dir) / p).string());
      from_file = true;
      continue;
    }
    if (inline_scenario.consume(t, where)) {
      if (from_preset || from_file)
        throw ConfigError(where + ": inline scenario conflicts with another scenario source");
      continue;
    }
    if (kw == "iterations") {
      if (t.size() != 2) throw ConfigError(where + ": 'iterations' wants one integer");
      spec.iterations = parse_int(t[1], where);
      has_iterations = true;
      continue;
    }
    if (kw == "seeds") {
      spec.seeds = expand_seed_tokens({t.begin() + 1, t.end()});
      has_seeds = true;
      continue;
    }
    if (kw == "oracle_method") {
      if (t.size() != 2) throw ConfigError(where + ": 'oracle_method' wants one value");
      if (t[1] == "mean_channel")
        spec.oracle.method = NeMethod::mean_channel;
      else if (t[1] == "sample_average")
        spec.oracle.method = NeMethod::sample_average;
      else
        throw ConfigError(where + ": unknown oracle method '" + t[1] + "'");
      continue;
    }
    if (kw == "oracle_samples") {
      spec.oracle.n_samples = static_cast<int>(parse_int(t.at(1), where));
      continue;
    }
    if (kw == "oracle_tol") {
      spec.oracle.tol = parse_num(t.at(1), where);
      continue;
    }
    if (kw == "oracle_max_sweeps") {
      spec.oracle.max_sweeps = static_cast<int>(parse_int(t.at(1), where));
      continue;
    }
    if (kw == "oracle_seed") {
      spec.oracle.seed = static_cast<uint64_t>(parse_int(t.at(1), where));
      continue;
    }
    if (kw == "threads") {
      spec.threads = static_cast<int>(parse_int(t.at(1), where));
      continue;
    }
    if (kw == "p0") {
      if (t.size() != 2 || t[1] != "uniform")
        throw ConfigError(where + ": only 'p0 uniform' or 'p0_row' lines are accepted");
      p0_uniform = true;
      continue;
    }
    if (kw == "p0_row") {
      if (t.size() < 3) throw ConfigError(where + ": 'p0_row' wants a user index and values");
      const long j = parse_int(t[1], where);
      Eigen::VectorXd row(t.size() - 2);
      for (size_t k = 2; k < t.size(); ++k)
        row(static_cast<Eigen::Index>(k - 2)) = parse_num(t[k], where);
      p0_rows.emplace_back(j, std::move(row));
      continue;
    }
    if (kw == "variant") {
      if (from_preset && !preset_variants_replaced) {
        spec.variants.clear();
        preset_variants_replaced = true;
      }
      variant_lines.push_back(t);
      variant_where.push_back(where);
      continue;
    }
    throw ConfigError(where + ": unknown keyword '" + kw + "'");
  }

  if (!from_preset && !from_file) spec.scenario = inline_scenario.finish("spec");
  for (size_t i = 0; i < variant_lines.size(); ++i)
    spec.variants.push_back(
        parse_variant_tokens(variant_lines[i], spec.scenario.cfg.users, variant_where[i]));

  if (p0_uniform && !p0_rows.empty())
    throw ConfigError("spec: 'p0 uniform' conflicts with 'p0_row' lines");
  if (!p0_rows.empty()) {
    const int N = spec.scenario.cfg.users, K = spec.scenario.cfg.channels;
    Eigen::MatrixXd p0 = Eigen::MatrixXd::Zero(N, K);
    std::vector<bool> seen(static_cast<size_t>(N), false);
    for (const auto& [j, row] : p0_rows) {
      if (j < 0 || j >= N) throw ConfigError("spec: p0_row user index out of range");
      if (row.size() != K) throw ConfigError("spec: p0_row wants one value per channel");
      p0.row(j) = row.transpose();
      seen[static_cast<size_t>(j)] = true;
    }
    if (!std::all_of(seen.begin(), seen.end(), [](bool b) { return b; }))
      throw ConfigError("spec: incomplete p0_row set");
    spec.p0 = p0;
  }
  validate(spec);
  return spec;
}

std::vector<uint64_t> expand_seed_tokens(const std::vector<std::string>& tokens) {
  std::vector<uint64_t> out;
  for (const auto& tok : tokens) {
    const auto dots = tok.find("..");
    if (dots == std::string::npos) {
      const long v = parse_int(tok, "seed list");
      if (v < 0) throw ConfigError("seed list: seeds must be nonnegative");
      out.push_back(static_cast<uint64_t>(v));
      continue;
    }
    const long lo = parse_int(tok.substr(0, dots), "seed list");
    const long hi = parse_int(tok.substr(dots + 2), "seed list");
    if (lo < 0 || lo > hi) throw ConfigError("seed list: bad range '" + tok + "'");
    for (long s = lo; s <= hi; ++s) out.push_back(static_cast<uint64_t>(s));
  }
  if (out.empty()) throw ConfigError("seed list: no seeds given");
  return out;
}

ExperimentSpec read_spec_file(const std::string& path) {
  try {
    return parse_spec_text(read_text_file(path),
                           std::filesystem::path(path).parent_path().string());
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

// ---- per-run CSV -----------------------------------------------------------

void write_run_csv(const RunLog& log, std::ostream& os) {
  const bool has_star = log.p_star.size() > 0;
  const int N = static_cast<int>(log.p0.rows());
  const int K = static_cast<int>(log.p0.cols());

  os << "# " << kVersion << "\n";
  os << "# run label=" << log.label << " alg=" << log.algorithm << " seed=" << log.seed
     << " iterations=" << log.rows.size();
  if (log.switch_at >= 0) os << " switch_at=" << log.switch_at;
  os << "\n";
  {
    std::istringstream is(log.run_text);
    std::string line;
    while (std::getline(is, line)) os << "# " << line << "\n";
  }
  os << "# scenario_begin\n";
  {
    std::istringstream is(log.scenario_text);
    std::string line;
    while (std::getline(is, line)) os << "# " << line << "\n";
  }
  os << "# scenario_end\n";
  if (has_star) {
    for (int j = 0; j < N; ++j) {
      os << "# pstar " << j;
      for (int k = 0; k < K; ++k) os << ' ' << fmt(log.p_star(j, k));
      os << "\n";
    }
  }
  for (int j = 0; j < N; ++j) {
    os << "# p0 " << j;
    for (int k = 0; k < K; ++k) os << ' ' << fmt(log.p0(j, k));
    os << "\n";
  }

  os << "n";
  for (int j = 0; j < N; ++j)
    for (int k = 0; k < K; ++k) os << ",p_" << j << "_" << k;
  if (log.has_avg)
    for (int j = 0; j < N; ++j)
      for (int k = 0; k < K; ++k) os << ",pavg_" << j << "_" << k;
  if (has_star) os << ",nse";
  if (has_star && log.has_avg) os << ",nse_avg";
  for (int j = 0; j < N; ++j) os << ",rate_" << j;
  if (log.has_learner_fields)
    for (int j = 0; j < N; ++j) os << ",step_a_" << j;
  if (log.has_learner_fields && has_star) os << ",bound_lhs,bound_rhs";
  os << "\n";

  for (const auto& row : log.rows) {
    os << row.n;
    for (int j = 0; j < N; ++j)
      for (int k = 0; k < K; ++k) os << ',' << fmt(row.p(j, k));
    if (log.has_avg)
      for (int j = 0; j < N; ++j)
        for (int k = 0; k < K; ++k) os << ',' << fmt(row.p_avg(j, k));
    if (has_star) os << ',' << fmt(row.nse);
    if (has_star && log.has_avg) os << ',' << fmt(row.nse_avg);
    for (int j = 0; j < N; ++j) os << ',' << fmt(row.rates(j));
    if (log.has_learner_fields)
      for (int j = 0; j < N; ++j) os << ',' << fmt(row.step(j));
    if (log.has_learner_fields && has_star)
      os << ',' << fmt(row.bound_lhs) << ',' << fmt(row.bound_rhs);
    os << "\n";
  }
}

bool CsvRun::has_column(const std::string& name) const {
  return std::find(columns.begin(), columns.end(), name) != columns.end();
}

int CsvRun::column(const std::string& name) const {
  const auto it = std::find(columns.begin(), columns.end(), name);
  if (it == columns.end()) throw IoError(path + ": missing column '" + name + "'");
  return static_cast<int>(it - columns.begin());
}

CsvRun read_run_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  CsvRun run;
  run.path = path;
  std::vector<std::pair<long, std::vector<double>>> pstar_rows;
  bool in_scenario = false, header_seen = false;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::string where = path + ":" + std::to_string(lineno);
    if (line[0] == '#') {
      std::string body = line.size() > 1 && line[1] == ' ' ? line.substr(2) : line.substr(1);
      if (body == "scenario_begin") {
        in_scenario = true;
        continue;
      }
      if (body == "scenario_end") {
        in_scenario = false;
        continue;
      }
      if (in_scenario) {
        run.scenario_block += body;
        run.scenario_block += '\n';
        continue;
      }
      const auto t = split_ws(body);
      if (t.empty()) continue;
      if (t[0] == "run") {
        for (size_t i = 1; i < t.size(); ++i) {
          const auto eq = t[i].find('=');
          if (eq == std::string::npos) continue;
          const std::string key = t[i].substr(0, eq), val = t[i].substr(eq + 1);
          if (key == "label") run.label = val;
          if (key == "alg") run.algorithm = val;
          if (key == "seed") run.seed = static_cast<uint64_t>(parse_int(val, where));
        }
      } else if (t[0] == "oracle") {
        std::string kept = "oracle";
        for (size_t i = 1; i < t.size(); ++i)
          if (t[i].rfind("residual=", 0) != 0 && t[i].rfind("sweeps=", 0) != 0)
            kept += " " + t[i];
        run.oracle_line = kept;
      } else if (t[0] == "pstar") {
        if (t.size() < 3) throw IoError(where + ": malformed pstar line");
        std::vector<double> vals;
        for (size_t i = 2; i < t.size(); ++i) vals.push_back(parse_num(t[i], where));
        pstar_rows.emplace_back(parse_int(t[1], where), std::move(vals));
      }
      continue;
    }
    if (!header_seen) {
      for (const auto& c : split_on(line, ',')) run.columns.push_back(c);
      if (run.columns.empty() || run.columns[0] != "n")
        throw IoError(where + ": expected a column header starting with 'n'");
      header_seen = true;
      continue;
    }
    const auto cells = split_on(line, ',');
    if (cells.size() != run.columns.size())
      throw IoError(where + ": expected " + std::to_string(run.columns.size()) + " cells");
    std::vector<double> row(cells.size());
    for (size_t i = 0; i < cells.size(); ++i) row[i] = parse_num(cells[i], where);
    run.data.push_back(std::move(row));
  }
  if (!header_seen) throw IoError(path + ": no column header found");
  if (run.label.empty()) throw IoError(path + ": missing '# run label=...' line");
  if (!pstar_rows.empty()) {
    long max_j = 0;
    for (const auto& [j, vals] : pstar_rows) max_j = std::max(max_j, j);
    run.p_star = Eigen::MatrixXd::Zero(max_j + 1,
                                       static_cast<Eigen::Index>(pstar_rows.front().second.size()));
    for (const auto& [j, vals] : pstar_rows)
      for (size_t k = 0; k < vals.size(); ++k)
        run.p_star(j, static_cast<Eigen::Index>(k)) = vals[k];
  }
  return run;
}

long audit_csv(const CsvRun& run, double tol) {
  if (!run.has_column("bound_lhs") || !run.has_column("bound_rhs"))
    throw ConfigError(run.path +
                      ": not an auditable learner run (no bound_lhs/bound_rhs columns)");
  const int lhs = run.column("bound_lhs");
  const int rhs = run.column("bound_rhs");
  long violations = 0;
  for (const auto& row : run.data)
    if (row[static_cast<size_t>(lhs)] > row[static_cast<size_t>(rhs)] + tol) ++violations;
  return violations;
}

}  // namespace pgic
