// Equilibrium oracle and convergence/stability diagnostics: normalized error,
// positive-definiteness sampling of the coupling matrix, Lipschitz estimation,
// projected-dynamics integration with its exponential-decay check, and the
// per-iteration telescoping-inequality audit of logged runs.
#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

#include "pgic/channel.hpp"
#include "pgic/run_log.hpp"
#include "pgic/types.hpp"

namespace pgic {

enum class NeMethod { mean_channel, sample_average };

struct NeSolution {
  Eigen::MatrixXd p_star;  // N x K equilibrium profile
  double residual = 0.0;   // max over users of the best-response displacement
  int sweeps = 0;          // best-response sweeps used
};

// Default knobs for the sample-average oracle.
struct OracleSettings {
  NeMethod method = NeMethod::sample_average;
  int n_samples = 2000;   // frozen pool size (sample_average only)
  double tol = 1e-8;
  int max_sweeps = 2000;
  uint64_t seed = 777;    // pool seed; independent of run seeds by domain
};

// Computes the equilibrium of the expected game. mean_channel solves the game
// at the mean gains; sample_average solves the game whose payoffs are averaged
// over a frozen pool of n_samples draws (the pool is redrawn deterministically
// from the seed, so repeated calls agree bit for bit). Throws OracleError if
// best-response iteration fails to reach tol within max_sweeps.
NeSolution solve_ne(const NetworkConfig& cfg, const ChannelDistribution& dist,
                    const OracleSettings& settings);

// Same solver on a caller-provided pool (used to keep the projected-dynamics
// fixed point consistent with its own sampled field).
NeSolution solve_ne_on_pool(const NetworkConfig& cfg,
                            const std::vector<ChannelRealization>& pool, double tol,
                            int max_sweeps);

// Normalized squared-error ratio ||p - ref||_F / ||ref||_F.
double nse(const Eigen::MatrixXd& p, const Eigen::MatrixXd& ref);

struct GammaPdReport {
  double pd_fraction = 0.0;   // share of sampled draws with lambda_min > 0
  double min_lambda = 0.0;    // smallest sampled lambda_min of sym(Gamma)
  double tau_min = 0.0;       // smallest sampled contraction modulus
};

// Samples n realizations and reports how often the coupling matrix certifies
// strong monotonicity.
GammaPdReport check_gamma_pd(const NetworkConfig& cfg, const ChannelDistribution& dist,
                             int n_samples, uint64_t seed);

// Monte-Carlo Lipschitz estimate of the pool-averaged gradient field: the max
// of ||s(x) - s(y)||_F / ||x - y||_F over n_pairs random feasible pairs.
// Nested in n_pairs for a fixed seed (more pairs can only raise the estimate).
double estimate_lipschitz(const NetworkConfig& cfg, const ChannelDistribution& dist,
                          int n_pairs, int n_samples, uint64_t seed);

// Draws a pseudorandom point of the joint feasible set (box sample per user,
// pulled radially under the budget). Shared by tests and the estimator above.
PowerProfile sample_feasible(const NetworkConfig& cfg, RngStream& rng);

struct PdsResult {
  std::vector<double> times;        // grid 0, h, 2h, ..., horizon
  std::vector<double> distances;    // ||p(t) - p*||_F on the grid
  Eigen::MatrixXd p_star;           // fixed point of the averaged field
  double tau_hat = 0.0;             // min contraction modulus over the pool
  double slack = 0.0;               // max_t (dist(t) - dist(0) e^{-tau_hat t})
  bool bound_checked = false;       // false when tau_hat <= 0
};

// Integrates the projected dynamics p <- proj(p + h * s_avg(p)) on a frozen
// pool of n_samples draws up to the horizon, solves the pool equilibrium, and
// evaluates the exponential-decay envelope when a positive modulus exists.
// h <= 0 requests the default step 0.01 / L with L estimated on the pool seed.
PdsResult pds_integrate(const NetworkConfig& cfg, const ChannelDistribution& dist,
                        const PowerProfile& p0, double horizon, double h,
                        int n_samples, uint64_t seed);

// Counts iterations of a logged run that violate the per-step telescoping
// bound against the given reference point (any feasible profile works; the
// equilibrium is the usual choice). c_hat <= 0 picks the bound constant
// automatically as 1.01 times the largest logged direction norm. Throws
// ConfigError when the log lacks the learner fields (e.g. water-filling runs).
long audit_telescoping(const RunLog& log, const Eigen::MatrixXd& ref, double c_hat,
                       double tol = 1e-12);

// Same walk, but also stores each iteration's bound sides into the log rows so
// they land in the CSV columns.
long annotate_telescoping(RunLog& log, const Eigen::MatrixXd& ref, double c_hat,
                          double tol = 1e-12);

struct DiagnosticsReport {
  GammaPdReport gamma;
  double tau_mean = 0.0;        // modulus at the mean gains
  double lipschitz = 0.0;
  double stable_step = 0.0;     // 2 tau / L^2 (nonpositive: nothing certified)
  long audit_violations = 0;
  double pds_slack = 0.0;
  bool pds_checked = false;
  std::vector<std::string> notes;

  std::string to_text() const;
};

}  // namespace pgic
