#include "pgic/types.hpp"

#include <sstream>

namespace pgic {

void validate(const NetworkConfig& cfg) {
  if (cfg.users < 1 || cfg.channels < 1)
    throw ConfigError("network: need at least one user and one channel");
  if (cfg.noise.rows() != cfg.users || cfg.noise.cols() != cfg.channels)
    throw ConfigError("network: noise matrix shape mismatch");
  if (cfg.p_max.size() != cfg.users)
    throw ConfigError("network: budget vector shape mismatch");
  if (cfg.mask.rows() != cfg.users || cfg.mask.cols() != cfg.channels)
    throw ConfigError("network: mask matrix shape mismatch");
  if (!(cfg.noise.array() > 0.0).all())
    throw ConfigError("network: noise floors must be strictly positive");
  for (int j = 0; j < cfg.users; ++j) {
    const double budget = cfg.p_max(j);
    if (!(budget > 0.0) || !std::isfinite(budget))
      throw ConfigError("network: budgets must be positive and finite");
    double mask_sum = 0.0;
    bool all_finite = true;
    for (int k = 0; k < cfg.channels; ++k) {
      const double m = cfg.mask(j, k);
      if (!(m > 0.0)) throw ConfigError("network: mask entries must be positive");
      if (std::isfinite(m)) {
        // A finite cap only shapes the set when it is below the budget.
        if (!(m < budget)) {
          std::ostringstream os;
          os << "network: user " << j << " mask on channel " << k
             << " must be below the budget (use an unbounded mask otherwise)";
          throw ConfigError(os.str());
        }
        mask_sum += m;
      } else {
        all_finite = false;
      }
    }
    // With every cap finite the budget must still bite, else the sum
    // constraint is vacuous and the game degenerates to a box.
    if (all_finite && !(budget < mask_sum))
      throw ConfigError("network: budget must be below the summed masks");
  }
}

void validate(const ChannelDistribution& dist, const NetworkConfig& cfg) {
  if (dist.channels() != cfg.channels || dist.users() != cfg.users)
    throw ConfigError("channel distribution: shape mismatch with network");
  for (const auto& m : dist.mean) {
    if (m.rows() != cfg.users || m.cols() != cfg.users)
      throw ConfigError("channel distribution: gain matrices must be N x N");
    for (int j = 0; j < cfg.users; ++j) {
      if (!(m(j, j) > 0.0) || !std::isfinite(m(j, j)))
        throw ConfigError("channel distribution: direct gains must be positive");
      for (int i = 0; i < cfg.users; ++i)
        if (m(j, i) < 0.0 || !std::isfinite(m(j, i)))
          throw ConfigError("channel distribution: cross gains must be nonnegative");
    }
  }
  if (!(dist.upsilon >= 0.0 && dist.upsilon < 1.0))
    throw ConfigError("channel distribution: upsilon must lie in [0, 1)");
}

bool PowerProfile::in_feasible_set(const NetworkConfig& cfg, double tol) const {
  if (powers.rows() != cfg.users || powers.cols() != cfg.channels) return false;
  for (int j = 0; j < cfg.users; ++j) {
    double sum = 0.0;
    for (int k = 0; k < cfg.channels; ++k) {
      const double p = powers(j, k);
      if (!std::isfinite(p)) return false;
      if (p < -tol) return false;
      if (p > cfg.effective_mask(j, k) + tol) return false;
      sum += p;
    }
    if (sum > cfg.p_max(j) + tol) return false;
  }
  return true;
}

PowerProfile PowerProfile::uniform(const NetworkConfig& cfg) {
  PowerProfile out = zero(cfg);
  for (int j = 0; j < cfg.users; ++j)
    for (int k = 0; k < cfg.channels; ++k)
      out.powers(j, k) = std::min(cfg.p_max(j) / cfg.channels, cfg.effective_mask(j, k));
  return out;
}

}  // namespace pgic
