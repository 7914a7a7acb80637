// Core value types for the power-control game: static network description,
// the random channel model, and power profiles.
//
// Conventions used everywhere: N users, K parallel channels. Gain tensors are
// stored per channel as N-by-N matrices with gains[k](j, i) = gain from
// transmitter i into receiver j on channel k. Power profiles are N-by-K with
// row j holding user j's per-channel transmit powers.
#pragma once

#include <Eigen/Core>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "pgic/errors.hpp"

namespace pgic {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Static part of the game: noise floors, per-user total power budgets, and
// per-channel spectral mask caps. Mask entries may be +inf (unbounded); the
// effective per-channel cap is always min(mask, budget).
struct NetworkConfig {
  int users = 0;
  int channels = 0;
  Eigen::MatrixXd noise;   // N x K, strictly positive
  Eigen::VectorXd p_max;   // N, strictly positive total budgets
  Eigen::MatrixXd mask;    // N x K, positive, +inf allowed

  double effective_mask(int j, int k) const {
    return std::min(mask(j, k), p_max(j));
  }

  Eigen::VectorXd effective_mask_row(int j) const {
    Eigen::VectorXd m(channels);
    for (int k = 0; k < channels; ++k) m(k) = effective_mask(j, k);
    return m;
  }
};

// Throws ConfigError unless the config describes a non-degenerate game.
// Finite masks must satisfy mask < p_max < sum(mask) per user so that neither
// the budget nor the caps are vacuous; unbounded masks skip that check.
void validate(const NetworkConfig& cfg);

// One draw of the fading state: a gain matrix per channel.
struct ChannelRealization {
  std::vector<Eigen::MatrixXd> gains;  // K matrices, each N x N

  int users() const { return gains.empty() ? 0 : static_cast<int>(gains[0].rows()); }
  int channels() const { return static_cast<int>(gains.size()); }
};

// Gain distribution: entrywise uniform on [mean*(1-upsilon), mean*(1+upsilon)],
// i.i.d. across entries, channels, and time slots.
struct ChannelDistribution {
  std::vector<Eigen::MatrixXd> mean;  // K matrices, each N x N
  double upsilon = 0.0;               // relative perturbation, in [0, 1)

  int users() const { return mean.empty() ? 0 : static_cast<int>(mean[0].rows()); }
  int channels() const { return static_cast<int>(mean.size()); }

  ChannelRealization mean_realization() const { return ChannelRealization{mean}; }
};

// Throws ConfigError on shape mismatch with cfg, nonpositive direct gains,
// negative cross gains, or upsilon outside [0, 1).
void validate(const ChannelDistribution& dist, const NetworkConfig& cfg);

// Transmit powers for all users.
struct PowerProfile {
  Eigen::MatrixXd powers;  // N x K, nonnegative

  // Membership in the joint feasible set: entrywise 0 <= p <= effective mask
  // and per-user sum <= budget, all up to an absolute tolerance.
  bool in_feasible_set(const NetworkConfig& cfg, double tol = 1e-9) const;

  static PowerProfile zero(const NetworkConfig& cfg) {
    return {Eigen::MatrixXd::Zero(cfg.users, cfg.channels)};
  }

  // Default start: each user spreads its full budget evenly, clipped to the
  // effective masks (with unbounded masks this is exactly p_max/K per channel).
  static PowerProfile uniform(const NetworkConfig& cfg);
};

}  // namespace pgic
