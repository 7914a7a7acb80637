// Learning dynamics: the stochastic multiplicative-feedback update (raw and
// averaged variants), feedback estimation with optional error models, and the
// iterative water-filling baseline with full channel knowledge.
#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

#include "pgic/channel.hpp"
#include "pgic/projection.hpp"
#include "pgic/rng.hpp"
#include "pgic/run_log.hpp"
#include "pgic/types.hpp"

namespace pgic {

// Step-size schedule a(n), n = 0, 1, 2, ...
struct StepSchedule {
  enum class Kind { constant, harmonic, shifted_harmonic, custom };

  Kind kind = Kind::constant;
  double a0 = 0.5;
  double n0 = 1.0;              // shift for shifted_harmonic: a0 / (1 + n/n0)
  std::vector<double> values;   // custom: holds at the last value past the end

  double at(long n) const;
  std::string describe() const;

  static StepSchedule constant(double a0) { return {Kind::constant, a0, 1.0, {}}; }
  static StepSchedule harmonic(double a0) { return {Kind::harmonic, a0, 1.0, {}}; }
  static StepSchedule shifted_harmonic(double a0, double n0) {
    return {Kind::shifted_harmonic, a0, n0, {}};
  }
  static StepSchedule custom(std::vector<double> v);
};

// Feedback error models applied to the measured signal fractions.
//  none:    the estimate is the exact fraction on the new draw (the only error
//           a learner sees is the randomness of the channel itself)
//  theta:   adds i.i.d. N(0, sigma^2) per entry, clamped back into [0, 1)
//  bias:    adds a deterministic drift of norm bias0/(n+1)^bias_pow along a
//           fixed alternating-sign direction, clamped into [0, 1)
struct NoiseModel {
  enum class Kind { none, theta, bias };

  Kind kind = Kind::none;
  double sigma = 0.0;
  double bias0 = 0.0;
  double bias_pow = 1.0;

  double bias_at(long n) const;
  std::string describe() const;

  static NoiseModel none() { return {}; }
  static NoiseModel theta(double sigma) { return {Kind::theta, sigma, 0.0, 1.0}; }
  static NoiseModel bias(double bias0, double bias_pow = 1.0) {
    return {Kind::bias, 0.0, bias0, bias_pow};
  }
};

// The two random streams a learner consumes, both derived from one seed.
struct LearnerRng {
  RngStream channel;
  RngStream noise;

  explicit LearnerRng(uint64_t seed)
      : channel(seed, StreamDomain::channel_draws),
        noise(seed, StreamDomain::noise_draws) {}
};

// Iterate state carried between steps. avg holds the running average of the
// iterates from step 1 onward (initialized to p at step 0).
struct LearnerState {
  PowerProfile p;
  PowerProfile avg;
  long n = 0;

  static LearnerState init(const PowerProfile& p0) { return {p0, p0, 0}; }
};

// Estimated signal fractions for all users on realization g at profile p,
// perturbed per the noise model. Exact fractions are clamped into [0, 1) after
// perturbation; entries on silent channels (p = 0) are left at zero.
Eigen::MatrixXd estimate_feedback(const ChannelRealization& g, const PowerProfile& p,
                                  const NetworkConfig& cfg, const NoiseModel& noise,
                                  long n, RngStream& noise_rng);

// Per-step internals surfaced for logging and the telescoping audit.
struct StepDetail {
  Eigen::MatrixXd grad_next;   // exact gradient at (old p, new draw)
  Eigen::MatrixXd direction;   // stochastic ascent direction actually used
  Eigen::VectorXd step;        // per-user step sizes applied
  Eigen::VectorXd eps;         // per-user ||direction_i - grad_i|| * diam
  Eigen::VectorXd rates_after; // per-user rates at (new p, new draw)
  double dir_max_norm = 0.0;
};

// One update of the raw stochastic learner: draw g(n+1), estimate feedback,
// take the multiplicative gradient step per user, and project back onto each
// user's feasible set. Schedules hold one entry (shared) or one per user.
LearnerState sdla1_step(const LearnerState& state, const NetworkConfig& cfg,
                        const ChannelDistribution& dist,
                        const std::vector<StepSchedule>& schedules,
                        const NoiseModel& noise, LearnerRng& rng,
                        StepDetail* detail = nullptr);

// Same update followed by the running-average recursion
//   avg(n+1) = (n * avg(n) + p(n+1)) / (n + 1),
// so avg(n) is the mean of p(1..n) for n >= 1.
LearnerState sdla2_step(const LearnerState& state, const NetworkConfig& cfg,
                        const ChannelDistribution& dist,
                        const std::vector<StepSchedule>& schedules,
                        const NoiseModel& noise, LearnerRng& rng,
                        StepDetail* detail = nullptr);

// Exact best response of user j on a known realization: water-filling against
// the interference the other rows of p produce, respecting masks and budget.
Eigen::VectorXd iwfa_best_response(const ChannelRealization& g, const PowerProfile& p,
                                   const NetworkConfig& cfg, int j);

enum class IwfaOrder { sequential, simultaneous };

// Iterative water-filling over random draws: each iteration draws a fresh
// realization and applies best responses in the given order (sequential picks
// up earlier users' updates within the sweep). p_star, when given, fills NSE.
RunLog iwfa_run(const NetworkConfig& cfg, const ChannelDistribution& dist,
                const PowerProfile& p0, long iterations, IwfaOrder order,
                uint64_t seed, const Eigen::MatrixXd* p_star = nullptr);

enum class Averaging { off, from_start, from_switch };

// Full learner run. averaging selects what the reported iterate is: the raw
// iterate, the running average from step 1, or (mixed mode) the raw iterate
// through switch_at and a restarted running average afterwards. p_star, when
// given, fills the NSE columns and the telescoping-audit bound columns.
RunLog run_learner(const NetworkConfig& cfg, const ChannelDistribution& dist,
                   const PowerProfile& p0, long iterations,
                   const std::vector<StepSchedule>& schedules, const NoiseModel& noise,
                   Averaging averaging, long switch_at, uint64_t seed,
                   const Eigen::MatrixXd* p_star = nullptr);

// Largest constant common step with a contraction certificate, 2*tau/L^2.
// Nonpositive when tau_hat <= 0, meaning no constant step is certified. Used
// for the configuration warning, never to gate a run.
double stable_step_bound(double tau_hat, double lipschitz_hat);

}  // namespace pgic
