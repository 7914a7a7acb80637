// Euclidean projection onto one user's feasible set
//   { p : 0 <= p^k <= cap^k, sum_k p^k <= budget }
// via the closed form p^k = clamp(q^k - lambda, 0, cap^k), with the multiplier
// lambda found exactly by sorting the 2K kink locations of the piecewise-linear
// budget function and interpolating on the crossing segment. No iterative
// tolerance is involved; accuracy is limited only by floating point.
#pragma once

#include <Eigen/Core>

#include "pgic/types.hpp"

namespace pgic {

struct ProjectionResult {
  Eigen::VectorXd p;  // the projected point
  double lambda;      // budget multiplier; 0 exactly when the budget is slack
  bool sum_binding;   // whether sum(p) == budget at the solution
};

// Projects q onto the set above. caps must be strictly positive (+inf allowed),
// budget strictly positive, q finite; otherwise throws ConfigError. When the
// budget function has a flat segment at the crossing (every coordinate pinned),
// the smallest valid lambda is returned; the projected point is unique always.
ProjectionResult project_user(const Eigen::VectorXd& q, const Eigen::VectorXd& caps,
                              double budget);

// Row-wise projection of a full profile using each user's effective masks and
// budget from cfg.
PowerProfile project_profile(const PowerProfile& q, const NetworkConfig& cfg);

}  // namespace pgic
