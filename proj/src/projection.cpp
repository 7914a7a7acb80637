#include "pgic/projection.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace pgic {

namespace {

// Budget used by the clamped point at multiplier lambda.
double clamped_sum(const Eigen::VectorXd& q, const Eigen::VectorXd& caps, double lambda) {
  double s = 0.0;
  for (Eigen::Index k = 0; k < q.size(); ++k)
    s += std::clamp(q(k) - lambda, 0.0, caps(k));
  return s;
}

Eigen::VectorXd clamped_point(const Eigen::VectorXd& q, const Eigen::VectorXd& caps,
                              double lambda) {
  Eigen::VectorXd p(q.size());
  for (Eigen::Index k = 0; k < q.size(); ++k)
    p(k) = std::clamp(q(k) - lambda, 0.0, caps(k));
  return p;
}

}  // namespace

ProjectionResult project_user(const Eigen::VectorXd& q, const Eigen::VectorXd& caps,
                              double budget) {
  const Eigen::Index K = q.size();
  if (caps.size() != K) throw ConfigError("projection: cap/point size mismatch");
  if (!(budget > 0.0) || !std::isfinite(budget))
    throw ConfigError("projection: budget must be positive and finite");
  for (Eigen::Index k = 0; k < K; ++k) {
    if (!std::isfinite(q(k))) throw ConfigError("projection: point must be finite");
    if (!(caps(k) > 0.0)) throw ConfigError("projection: caps must be positive");
  }

  // Slack budget: clipping to the box alone is the projection.
  const double at_zero = clamped_sum(q, caps, 0.0);
  if (at_zero <= budget)
    return {clamped_point(q, caps, 0.0), 0.0, at_zero >= budget};

  // The budget binds. sum(lambda) is piecewise linear and nonincreasing, with
  // kinks only where some coordinate enters or leaves its clamp: at q_k - cap_k
  // (leaves the cap) and q_k (hits zero). Sweep the positive kinks in order and
  // interpolate on the first segment that crosses the budget; linearity makes
  // the interpolation exact, and taking the first crossing yields the smallest
  // valid multiplier when a flat segment sits exactly at the budget.
  std::vector<double> kinks;
  kinks.reserve(static_cast<size_t>(2 * K));
  for (Eigen::Index k = 0; k < K; ++k) {
    if (q(k) > 0.0) kinks.push_back(q(k));
    if (std::isfinite(caps(k)) && q(k) - caps(k) > 0.0) kinks.push_back(q(k) - caps(k));
  }
  std::sort(kinks.begin(), kinks.end());

  double lo = 0.0;
  double sum_lo = at_zero;
  for (const double hi : kinks) {
    if (hi <= lo) continue;
    const double sum_hi = clamped_sum(q, caps, hi);
    if (sum_hi <= budget) {
      const double lambda =
          sum_hi == sum_lo ? lo : lo + (sum_lo - budget) * (hi - lo) / (sum_lo - sum_hi);
      return {clamped_point(q, caps, lambda), lambda, true};
    }
    lo = hi;
    sum_lo = sum_hi;
  }
  // Beyond the largest kink every coordinate is clamped to zero, so the sum is
  // 0 < budget there; a crossing segment always exists for valid inputs.
  throw ConfigError("projection: no bracketing segment (inputs violate preconditions)");
}

PowerProfile project_profile(const PowerProfile& q, const NetworkConfig& cfg) {
  PowerProfile out = PowerProfile::zero(cfg);
  for (int j = 0; j < cfg.users; ++j) {
    const ProjectionResult r =
        project_user(q.powers.row(j).transpose(), cfg.effective_mask_row(j), cfg.p_max(j));
    out.powers.row(j) = r.p.transpose();
  }
  return out;
}

}  // namespace pgic
