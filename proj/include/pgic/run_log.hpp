// In-memory record of one simulated run: everything the CSV writer, the
// telescoping-inequality audit, and the comparison tooling need.
#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

namespace pgic {

struct RunRow {
  long n = 0;                 // iteration index, starting at 1
  Eigen::MatrixXd p;          // iterate after the update, N x K
  Eigen::MatrixXd p_avg;      // reported averaged iterate (empty when unused)
  double nse = 0.0;           // ||p - p*||_F / ||p*||_F, NaN without an oracle
  double nse_avg = 0.0;       // same for the averaged iterate
  Eigen::VectorXd rates;      // per-user rates at (p, g(n)) in nats
  Eigen::VectorXd step;       // per-user step sizes a_i(n-1) used for this update
  Eigen::MatrixXd grad_next;  // exact gradient at (previous iterate, g(n)), N x K
  Eigen::VectorXd eps;        // per-user feedback-error bounds for the audit
  double dir_max_norm = 0.0;  // max_i || step direction of user i ||_2
  double bound_lhs = 0.0;     // squared distance to p* after the update
  double bound_rhs = 0.0;     // telescoping bound on that distance
};

struct RunLog {
  std::string algorithm;      // sdla1 | sdla2 | sdla-mixed | iwfa
  std::string label;          // variant label used in filenames and compare
  uint64_t seed = 0;
  long switch_at = -1;        // mixed mode: last iteration reported raw
  bool has_avg = false;       // whether p_avg / nse_avg are populated
  bool has_learner_fields = false;  // step/grad_next/eps valid (not for iwfa)
  Eigen::MatrixXd p0;         // initial profile (iteration 0)
  Eigen::MatrixXd p_star;     // oracle equilibrium (empty when not supplied)
  std::string scenario_text;  // canonical scenario block for header embedding
  std::string run_text;       // schedule/noise/oracle description lines
  std::vector<RunRow> rows;
};

}  // namespace pgic
