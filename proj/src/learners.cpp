#include "pgic/learners.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace pgic {

double StepSchedule::at(long n) const {
  switch (kind) {
    case Kind::constant:
      return a0;
    case Kind::harmonic:
      return a0 / static_cast<double>(n + 1);
    case Kind::shifted_harmonic:
      return a0 / (1.0 + static_cast<double>(n) / n0);
    case Kind::custom: {
      const size_t i = std::min(static_cast<size_t>(n), values.size() - 1);
      return values[i];
    }
  }
  return a0;
}

std::string StepSchedule::describe() const {
  std::ostringstream os;
  switch (kind) {
    case Kind::constant: os << "constant a0=" << a0; break;
    case Kind::harmonic: os << "harmonic a0=" << a0; break;
    case Kind::shifted_harmonic: os << "shifted-harmonic a0=" << a0 << " n0=" << n0; break;
    case Kind::custom: os << "custom len=" << values.size(); break;
  }
  return os.str();
}

StepSchedule StepSchedule::custom(std::vector<double> v) {
  if (v.empty()) throw ConfigError("schedule: custom value list must be nonempty");
  for (double a : v)
    if (!(a > 0.0) || !std::isfinite(a))
      throw ConfigError("schedule: custom steps must be positive and finite");
  StepSchedule s;
  s.kind = Kind::custom;
  s.values = std::move(v);
  return s;
}

double NoiseModel::bias_at(long n) const {
  return bias0 / std::pow(static_cast<double>(n + 1), bias_pow);
}

std::string NoiseModel::describe() const {
  std::ostringstream os;
  switch (kind) {
    case Kind::none: os << "none"; break;
    case Kind::theta: os << "theta sigma=" << sigma; break;
    case Kind::bias: os << "bias b0=" << bias0 << " pow=" << bias_pow; break;
  }
  return os.str();
}

namespace {

// Largest fraction value representable strictly below 1; estimates are clamped
// into [0, this] so a perturbed fraction can never reach or exceed 1.
constexpr double kFractionCeil = 0.999999999999;

const StepSchedule& schedule_for(const std::vector<StepSchedule>& schedules, int j) {
  return schedules.size() == 1 ? schedules[0] : schedules[static_cast<size_t>(j)];
}

// Diameter bound of one user's feasible set: the set sits inside the scaled
// simplex {p >= 0, sum p <= budget}, whose diameter is budget * sqrt(2).
double feasible_diameter(const NetworkConfig& cfg, int j) {
  return cfg.p_max(j) * std::sqrt(2.0);
}

}  // namespace

Eigen::MatrixXd estimate_feedback(const ChannelRealization& g, const PowerProfile& p,
                                  const NetworkConfig& cfg, const NoiseModel& noise,
                                  long n, RngStream& noise_rng) {
  Eigen::MatrixXd f(cfg.users, cfg.channels);
  for (int j = 0; j < cfg.users; ++j) f.row(j) = signal_fraction(g, p, cfg, j).transpose();
  if (noise.kind == NoiseModel::Kind::none) return f;

  const double beta = noise.kind == NoiseModel::Kind::bias ? noise.bias_at(n) : 0.0;
  const double unit = 1.0 / std::sqrt(static_cast<double>(cfg.channels));
  for (int j = 0; j < cfg.users; ++j) {
    for (int k = 0; k < cfg.channels; ++k) {
      if (p.powers(j, k) <= 0.0) continue;  // nothing transmitted, nothing measured
      double delta = 0.0;
      if (noise.kind == NoiseModel::Kind::theta) {
        delta = noise.sigma * noise_rng.normal();
      } else {
        // Fixed alternating-sign unit direction; deterministic, norm beta.
        delta = beta * unit * (k % 2 == 0 ? 1.0 : -1.0);
      }
      f(j, k) = std::clamp(f(j, k) + delta, 0.0, kFractionCeil);
    }
  }
  return f;
}

namespace {

LearnerState core_step(const LearnerState& state, const NetworkConfig& cfg,
                       const ChannelDistribution& dist,
                       const std::vector<StepSchedule>& schedules,
                       const NoiseModel& noise, LearnerRng& rng, StepDetail* detail) {
  if (schedules.size() != 1 && schedules.size() != static_cast<size_t>(cfg.users))
    throw ConfigError("learner: need one schedule or one per user");

  const ChannelRealization g = sample_realization(dist, rng.channel);
  const Eigen::MatrixXd f_hat =
      estimate_feedback(g, state.p, cfg, noise, state.n, rng.noise);
  const Eigen::MatrixXd grad = rate_gradient_all(g, state.p, cfg);

  LearnerState next = state;
  next.n = state.n + 1;
  Eigen::MatrixXd direction(cfg.users, cfg.channels);
  Eigen::VectorXd steps(cfg.users);
  Eigen::VectorXd eps(cfg.users);
  double dir_max = 0.0;
  for (int j = 0; j < cfg.users; ++j) {
    const double a = schedule_for(schedules, j).at(state.n);
    steps(j) = a;
    Eigen::VectorXd dir(cfg.channels);
    if (noise.kind == NoiseModel::Kind::none) {
      // Exact feedback: the fraction ratio equals the gradient, so use the
      // interference form directly (finite at p = 0, no rounding detour).
      dir = grad.row(j).transpose();
    } else {
      for (int k = 0; k < cfg.channels; ++k) {
        const double pjk = state.p.powers(j, k);
        // The measured-fraction ratio when the channel is live; on a silent
        // channel fall back to the exact gradient (its p -> 0 limit), which
        // the interference form evaluates with no division by zero.
        dir(k) = pjk > 0.0 ? f_hat(j, k) / pjk : grad(j, k);
      }
    }
    const ProjectionResult proj = project_user(
        state.p.powers.row(j).transpose() + a * dir, cfg.effective_mask_row(j), cfg.p_max(j));
    next.p.powers.row(j) = proj.p.transpose();
    direction.row(j) = dir.transpose();
    eps(j) = (dir - grad.row(j).transpose()).norm() * feasible_diameter(cfg, j);
    dir_max = std::max(dir_max, dir.norm());
  }

  if (detail != nullptr) {
    detail->grad_next = grad;
    detail->direction = direction;
    detail->step = steps;
    detail->eps = eps;
    detail->rates_after = rates(g, next.p, cfg);
    detail->dir_max_norm = dir_max;
  }
  return next;
}

}  // namespace

LearnerState sdla1_step(const LearnerState& state, const NetworkConfig& cfg,
                        const ChannelDistribution& dist,
                        const std::vector<StepSchedule>& schedules,
                        const NoiseModel& noise, LearnerRng& rng, StepDetail* detail) {
  LearnerState next = core_step(state, cfg, dist, schedules, noise, rng, detail);
  next.avg = next.p;  // the raw learner reports its iterate
  return next;
}

LearnerState sdla2_step(const LearnerState& state, const NetworkConfig& cfg,
                        const ChannelDistribution& dist,
                        const std::vector<StepSchedule>& schedules,
                        const NoiseModel& noise, LearnerRng& rng, StepDetail* detail) {
  LearnerState next = core_step(state, cfg, dist, schedules, noise, rng, detail);
  const double n = static_cast<double>(state.n);
  next.avg.powers = (n * state.avg.powers + next.p.powers) / (n + 1.0);
  return next;
}

Eigen::VectorXd iwfa_best_response(const ChannelRealization& g, const PowerProfile& p,
                                   const NetworkConfig& cfg, int j) {
  const int K = cfg.channels;
  // Per-channel floors: interference-plus-noise over direct gain. The best
  // response fills p^k = clamp(mu - floor_k, 0, cap_k) with mu chosen so the
  // spent power equals the budget (or every cap binds first).
  Eigen::VectorXd floor(K);
  for (int k = 0; k < K; ++k) {
    const auto& gk = g.gains[k];
    double intf = cfg.noise(j, k);
    for (int i = 0; i < cfg.users; ++i)
      if (i != j) intf += gk(j, i) * p.powers(i, k);
    floor(k) = intf / gk(j, j);
  }
  const Eigen::VectorXd caps = cfg.effective_mask_row(j);
  const double cap_sum = caps.sum();
  const double budget = cfg.p_max(j);
  if (cap_sum <= budget) return caps;  // budget slack: rate is increasing, fill caps

  // Water level by exact sweep over the kinks of the nondecreasing spent-power
  // function, mirroring the projection solver.
  auto spent = [&](double mu) {
    double s = 0.0;
    for (int k = 0; k < K; ++k) s += std::clamp(mu - floor(k), 0.0, caps(k));
    return s;
  };
  std::vector<double> kinks;
  kinks.reserve(static_cast<size_t>(2 * K));
  for (int k = 0; k < K; ++k) {
    kinks.push_back(floor(k));
    if (std::isfinite(caps(k))) kinks.push_back(floor(k) + caps(k));
  }
  std::sort(kinks.begin(), kinks.end());
  double lo = kinks.front();
  double spent_lo = 0.0;
  double mu = lo;
  bool found = false;
  for (const double hi : kinks) {
    if (hi <= lo) continue;
    const double spent_hi = spent(hi);
    if (spent_hi >= budget) {
      mu = spent_hi == spent_lo ? lo
                                : lo + (budget - spent_lo) * (hi - lo) / (spent_hi - spent_lo);
      found = true;
      break;
    }
    lo = hi;
    spent_lo = spent_hi;
  }
  if (!found) {
    // All caps exhausted below the budget is excluded above, so the level sits
    // past the last kink where every free channel grows linearly.
    const int free_channels = [&] {
      int c = 0;
      for (int k = 0; k < K; ++k)
        if (!std::isfinite(caps(k))) ++c;
      return c;
    }();
    if (free_channels == 0)
      throw ConfigError("water-filling: budget exceeds reachable spend");
    mu = kinks.back() + (budget - spent(kinks.back())) / free_channels;
  }
  Eigen::VectorXd out(K);
  for (int k = 0; k < K; ++k) out(k) = std::clamp(mu - floor(k), 0.0, caps(k));
  return out;
}

RunLog iwfa_run(const NetworkConfig& cfg, const ChannelDistribution& dist,
                const PowerProfile& p0, long iterations, IwfaOrder order,
                uint64_t seed, const Eigen::MatrixXd* p_star) {
  validate(cfg);
  validate(dist, cfg);
  RunLog log;
  log.algorithm = "iwfa";
  log.seed = seed;
  log.p0 = p0.powers;
  if (p_star != nullptr) log.p_star = *p_star;
  log.rows.reserve(static_cast<size_t>(iterations));

  RngStream channel_rng(seed, StreamDomain::channel_draws);
  PowerProfile p = p0;
  const double star_norm = p_star != nullptr ? p_star->norm() : 0.0;
  for (long n = 1; n <= iterations; ++n) {
    const ChannelRealization g = sample_realization(dist, channel_rng);
    if (order == IwfaOrder::sequential) {
      for (int j = 0; j < cfg.users; ++j)
        p.powers.row(j) = iwfa_best_response(g, p, cfg, j).transpose();
    } else {
      PowerProfile fresh = p;
      for (int j = 0; j < cfg.users; ++j)
        fresh.powers.row(j) = iwfa_best_response(g, p, cfg, j).transpose();
      p = fresh;
    }
    RunRow row;
    row.n = n;
    row.p = p.powers;
    row.nse = p_star != nullptr ? (p.powers - *p_star).norm() / star_norm
                                : std::numeric_limits<double>::quiet_NaN();
    row.nse_avg = row.nse;
    row.rates = rates(g, p, cfg);
    log.rows.push_back(std::move(row));
  }
  return log;
}

RunLog run_learner(const NetworkConfig& cfg, const ChannelDistribution& dist,
                   const PowerProfile& p0, long iterations,
                   const std::vector<StepSchedule>& schedules, const NoiseModel& noise,
                   Averaging averaging, long switch_at, uint64_t seed,
                   const Eigen::MatrixXd* p_star) {
  validate(cfg);
  validate(dist, cfg);
  if (!p0.in_feasible_set(cfg))
    throw ConfigError("learner: initial profile is not feasible");
  if (averaging == Averaging::from_switch && switch_at < 0)
    throw ConfigError("learner: mixed mode needs a nonnegative switch iteration");

  RunLog log;
  log.algorithm = averaging == Averaging::off
                      ? "sdla1"
                      : (averaging == Averaging::from_start ? "sdla2" : "sdla-mixed");
  log.seed = seed;
  log.switch_at = averaging == Averaging::from_switch ? switch_at : -1;
  log.has_avg = averaging != Averaging::off;
  log.has_learner_fields = true;
  log.p0 = p0.powers;
  if (p_star != nullptr) log.p_star = *p_star;
  log.rows.reserve(static_cast<size_t>(iterations));

  LearnerRng rng(seed);
  LearnerState state = LearnerState::init(p0);
  const double star_norm = p_star != nullptr ? p_star->norm() : 0.0;
  Eigen::MatrixXd mixed_avg;  // restarted mean for the switched report
  for (long n = 1; n <= iterations; ++n) {
    StepDetail detail;
    state = averaging == Averaging::from_start
                ? sdla2_step(state, cfg, dist, schedules, noise, rng, &detail)
                : sdla1_step(state, cfg, dist, schedules, noise, rng, &detail);

    RunRow row;
    row.n = n;
    row.p = state.p.powers;
    if (averaging == Averaging::from_start) {
      row.p_avg = state.avg.powers;
    } else if (averaging == Averaging::from_switch) {
      if (n <= switch_at) {
        row.p_avg = state.p.powers;  // still reporting the raw iterate
      } else {
        const double count = static_cast<double>(n - switch_at);
        if (mixed_avg.size() == 0)
          mixed_avg = state.p.powers;
        else
          mixed_avg = ((count - 1.0) * mixed_avg + state.p.powers) / count;
        row.p_avg = mixed_avg;
      }
    }
    if (p_star != nullptr) {
      row.nse = (row.p - *p_star).norm() / star_norm;
      row.nse_avg = log.has_avg ? (row.p_avg - *p_star).norm() / star_norm : row.nse;
    } else {
      row.nse = std::numeric_limits<double>::quiet_NaN();
      row.nse_avg = row.nse;
    }
    row.rates = detail.rates_after;
    row.step = detail.step;
    row.grad_next = detail.grad_next;
    row.eps = detail.eps;
    row.dir_max_norm = detail.dir_max_norm;
    log.rows.push_back(std::move(row));
  }
  return log;
}

double stable_step_bound(double tau_hat, double lipschitz_hat) {
  return 2.0 * tau_hat / (lipschitz_hat * lipschitz_hat);
}

}  // namespace pgic
