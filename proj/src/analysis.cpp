#include "pgic/analysis.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "pgic/learners.hpp"
#include "pgic/projection.hpp"

namespace pgic {

namespace {

std::vector<ChannelRealization> draw_pool(const ChannelDistribution& dist, int n_samples,
                                          uint64_t seed, uint32_t instance = 0) {
  RngStream rng(seed, StreamDomain::oracle_pool, instance);
  std::vector<ChannelRealization> pool;
  pool.reserve(static_cast<size_t>(n_samples));
  for (int m = 0; m < n_samples; ++m) pool.push_back(sample_realization(dist, rng));
  return pool;
}

// Pool-averaged gradient field, one row per user.
Eigen::MatrixXd pool_gradient(const std::vector<ChannelRealization>& pool,
                              const PowerProfile& p, const NetworkConfig& cfg) {
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(cfg.users, cfg.channels);
  for (const auto& g : pool) s += rate_gradient_all(g, p, cfg);
  return s / static_cast<double>(pool.size());
}

// Best response of user j against the pool-averaged payoff, by projected
// gradient ascent. Runs Armijo backtracking while objective increases are
// resolvable in double precision, then switches to fixed-step iterations at
// the curvature bound, which keep contracting without comparing objective
// values and so reach tolerances the line search cannot. The caller's
// tolerance is enforced through the unit-step gradient map.
Eigen::VectorXd pool_best_response(const std::vector<ChannelRealization>& pool,
                                   const PowerProfile& p, const NetworkConfig& cfg, int j,
                                   double inner_tol, int max_iters) {
  const int K = cfg.channels;
  const int M = static_cast<int>(pool.size());
  // Frozen per-sample direct gains and interference while p_{-j} is held fixed.
  Eigen::MatrixXd direct(M, K);
  Eigen::MatrixXd intf(M, K);
  for (int m = 0; m < M; ++m) {
    for (int k = 0; k < K; ++k) {
      const auto& gk = pool[static_cast<size_t>(m)].gains[static_cast<size_t>(k)];
      direct(m, k) = gk(j, j);
      double acc = cfg.noise(j, k);
      for (int i = 0; i < cfg.users; ++i)
        if (i != j) acc += gk(j, i) * p.powers(i, k);
      intf(m, k) = acc;
    }
  }
  const auto value = [&](const Eigen::VectorXd& x) {
    double v = 0.0;
    for (int m = 0; m < M; ++m)
      for (int k = 0; k < K; ++k) v += std::log1p(direct(m, k) * x(k) / intf(m, k));
    return v / M;
  };
  const auto grad = [&](const Eigen::VectorXd& x) {
    Eigen::VectorXd g = Eigen::VectorXd::Zero(K);
    for (int m = 0; m < M; ++m)
      for (int k = 0; k < K; ++k)
        g(k) += direct(m, k) / (intf(m, k) + direct(m, k) * x(k));
    return (g / M).eval();
  };

  const Eigen::VectorXd caps = cfg.effective_mask_row(j);
  const double budget = cfg.p_max(j);
  // Curvature at zero power bounds the objective's smoothness constant.
  double lip = 0.0;
  for (int k = 0; k < K; ++k) {
    double c = 0.0;
    for (int m = 0; m < M; ++m) {
      const double r = direct(m, k) / intf(m, k);
      c += r * r;
    }
    lip = std::max(lip, c / M);
  }
  double t = 1.0 / lip;

  Eigen::VectorXd x = p.powers.row(j).transpose();
  double fx = value(x);
  bool polish = false;
  for (int iter = 0; iter < max_iters; ++iter) {
    const Eigen::VectorXd g = grad(x);
    if ((project_user(x + g, caps, budget).p - x).lpNorm<Eigen::Infinity>() <= inner_tol)
      return x;
    if (polish) {
      const Eigen::VectorXd xn = project_user(x + g / lip, caps, budget).p;
      // At the floating-point fixed point of the contraction nothing can move
      // further; the point is as converged as the arithmetic allows.
      if ((xn - x).lpNorm<Eigen::Infinity>() == 0.0) return x;
      x = xn;
      continue;
    }
    Eigen::VectorXd xn;
    double fn = 0.0;
    bool accepted = false;
    for (int shrink = 0; shrink < 60; ++shrink) {
      xn = project_user(x + t * g, caps, budget).p;
      fn = value(xn);
      if (fn >= fx + 1e-4 * g.dot(xn - x)) {
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted || (xn - x).lpNorm<Eigen::Infinity>() < 1e-12 * (1.0 + x.norm())) {
      // Objective differences are below resolution; hand over to the polish
      // phase instead of settling for line-search accuracy.
      polish = true;
      continue;
    }
    x = xn;
    fx = fn;
    t = std::min(t * 1.5, 1e12);
  }
  throw OracleError("equilibrium oracle: best-response ascent failed to converge");
}

}  // namespace

NeSolution solve_ne_on_pool(const NetworkConfig& cfg,
                            const std::vector<ChannelRealization>& pool, double tol,
                            int max_sweeps) {
  if (pool.empty()) throw ConfigError("equilibrium oracle: empty sample pool");
  const double inner_tol = std::max(tol * 0.05, 1e-13);
  PowerProfile p = PowerProfile::uniform(cfg);
  double residual = std::numeric_limits<double>::infinity();
  int sweep = 0;
  for (; sweep < max_sweeps; ++sweep) {
    double disp = 0.0;
    for (int j = 0; j < cfg.users; ++j) {
      const Eigen::VectorXd next = pool_best_response(pool, p, cfg, j, inner_tol, 20000);
      disp = std::max(disp, (next - p.powers.row(j).transpose()).lpNorm<Eigen::Infinity>());
      p.powers.row(j) = next.transpose();
    }
    residual = disp;
    if (disp <= tol) {
      // Also require the joint profile to be a unit-step projection fixed
      // point; this is the property downstream checks rely on.
      const Eigen::MatrixXd s = pool_gradient(pool, p, cfg);
      const PowerProfile mapped = project_profile({p.powers + s}, cfg);
      const double gradmap = (mapped.powers - p.powers).lpNorm<Eigen::Infinity>();
      residual = std::max(disp, gradmap);
      if (gradmap <= tol) break;
      if (disp == 0.0) {
        // Best responses are frozen, so further sweeps cannot change anything.
        std::ostringstream os;
        os << "equilibrium oracle: best responses are stationary but the profile "
              "gradient map is "
           << gradmap << " (tolerance " << tol << ")";
        throw OracleError(os.str());
      }
    }
  }
  if (sweep == max_sweeps) {
    std::ostringstream os;
    os << "equilibrium oracle: best-response iteration stalled at residual " << residual
       << " after " << max_sweeps << " sweeps (tolerance " << tol << ")";
    throw OracleError(os.str());
  }
  return {p.powers, residual, sweep + 1};
}

NeSolution solve_ne(const NetworkConfig& cfg, const ChannelDistribution& dist,
                    const OracleSettings& settings) {
  validate(cfg);
  validate(dist, cfg);
  if (settings.method == NeMethod::mean_channel) {
    const ChannelRealization mean = dist.mean_realization();
    PowerProfile p = PowerProfile::uniform(cfg);
    double disp = std::numeric_limits<double>::infinity();
    int sweep = 0;
    for (; sweep < settings.max_sweeps; ++sweep) {
      disp = 0.0;
      for (int j = 0; j < cfg.users; ++j) {
        const Eigen::VectorXd next = iwfa_best_response(mean, p, cfg, j);
        disp =
            std::max(disp, (next - p.powers.row(j).transpose()).lpNorm<Eigen::Infinity>());
        p.powers.row(j) = next.transpose();
      }
      if (disp <= settings.tol) break;
    }
    if (sweep == settings.max_sweeps) {
      std::ostringstream os;
      os << "equilibrium oracle: mean-channel iteration stalled at residual " << disp;
      throw OracleError(os.str());
    }
    return {p.powers, disp, sweep + 1};
  }
  if (settings.n_samples < 1)
    throw ConfigError("equilibrium oracle: sample pool must be nonempty");
  // Zero spread collapses every draw to the mean; skip the redundant copies.
  const int n = dist.upsilon == 0.0 ? 1 : settings.n_samples;
  const auto pool = draw_pool(dist, n, settings.seed);
  return solve_ne_on_pool(cfg, pool, settings.tol, settings.max_sweeps);
}

double nse(const Eigen::MatrixXd& p, const Eigen::MatrixXd& ref) {
  const double denom = ref.norm();
  if (!(denom > 0.0)) throw ConfigError("nse: reference profile must be nonzero");
  return (p - ref).norm() / denom;
}

GammaPdReport check_gamma_pd(const NetworkConfig& cfg, const ChannelDistribution& dist,
                             int n_samples, uint64_t seed) {
  validate(cfg);
  validate(dist, cfg);
  if (n_samples < 1) throw ConfigError("gamma check: need at least one sample");
  RngStream rng(seed, StreamDomain::scratch);
  GammaPdReport report;
  report.min_lambda = std::numeric_limits<double>::infinity();
  report.tau_min = std::numeric_limits<double>::infinity();
  int positive = 0;
  for (int m = 0; m < n_samples; ++m) {
    const ChannelRealization g = sample_realization(dist, rng);
    const double t = tau(g, cfg);
    // Recover lambda_min from tau by undoing the kappa scaling is wasteful;
    // compute it directly instead.
    const Eigen::MatrixXd gamma = gamma_matrix(g, cfg);
    const Eigen::MatrixXd sym = 0.5 * (gamma + gamma.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym, Eigen::EigenvaluesOnly);
    const double lmin = es.eigenvalues().minCoeff();
    if (lmin > 0.0) ++positive;
    report.min_lambda = std::min(report.min_lambda, lmin);
    report.tau_min = std::min(report.tau_min, t);
  }
  report.pd_fraction = static_cast<double>(positive) / n_samples;
  return report;
}

PowerProfile sample_feasible(const NetworkConfig& cfg, RngStream& rng) {
  PowerProfile out = PowerProfile::zero(cfg);
  for (int j = 0; j < cfg.users; ++j) {
    double sum = 0.0;
    for (int k = 0; k < cfg.channels; ++k) {
      out.powers(j, k) = rng.uniform(0.0, cfg.effective_mask(j, k));
      sum += out.powers(j, k);
    }
    // Radial pull-back keeps the draw count per user fixed: the factor is
    // always consumed even when the box sample already satisfies the budget.
    const double u = rng.next_double();
    if (sum > cfg.p_max(j)) {
      const double scale =
          (cfg.p_max(j) / sum) * std::pow(u, 1.0 / static_cast<double>(cfg.channels));
      out.powers.row(j) *= scale;
    }
  }
  return out;
}

double estimate_lipschitz(const NetworkConfig& cfg, const ChannelDistribution& dist,
                          int n_pairs, int n_samples, uint64_t seed) {
  validate(cfg);
  validate(dist, cfg);
  if (n_pairs < 1 || n_samples < 1)
    throw ConfigError("lipschitz estimate: need at least one pair and one sample");
  const int n = dist.upsilon == 0.0 ? 1 : n_samples;
  const auto pool = draw_pool(dist, n, seed, /*instance=*/1);
  RngStream points(seed, StreamDomain::feasible_points);
  double best = 0.0;
  for (int i = 0; i < n_pairs; ++i) {
    const PowerProfile x = sample_feasible(cfg, points);
    const PowerProfile y = sample_feasible(cfg, points);
    const double dxy = (x.powers - y.powers).norm();
    if (dxy <= 0.0) continue;
    const double ds = (pool_gradient(pool, x, cfg) - pool_gradient(pool, y, cfg)).norm();
    best = std::max(best, ds / dxy);
  }
  return best;
}

PdsResult pds_integrate(const NetworkConfig& cfg, const ChannelDistribution& dist,
                        const PowerProfile& p0, double horizon, double h, int n_samples,
                        uint64_t seed) {
  validate(cfg);
  validate(dist, cfg);
  if (!p0.in_feasible_set(cfg))
    throw ConfigError("projected dynamics: initial profile is not feasible");
  if (!(horizon > 0.0)) throw ConfigError("projected dynamics: horizon must be positive");
  const int n = dist.upsilon == 0.0 ? 1 : n_samples;
  const auto pool = draw_pool(dist, n, seed);
  if (h <= 0.0) {
    const double lip = estimate_lipschitz(cfg, dist, 100, std::min(n, 50), seed);
    h = lip > 0.0 ? 0.01 / lip : 0.01;
  }

  PdsResult result;
  const NeSolution star = solve_ne_on_pool(cfg, pool, 1e-10, 5000);
  result.p_star = star.p_star;
  result.tau_hat = std::numeric_limits<double>::infinity();
  for (const auto& g : pool) result.tau_hat = std::min(result.tau_hat, tau(g, cfg));
  result.bound_checked = result.tau_hat > 0.0;

  const long steps = static_cast<long>(std::ceil(horizon / h));
  PowerProfile p = p0;
  const double d0 = (p.powers - result.p_star).norm();
  result.times.reserve(static_cast<size_t>(steps) + 1);
  result.distances.reserve(static_cast<size_t>(steps) + 1);
  result.slack = 0.0;
  for (long m = 0; m <= steps; ++m) {
    const double t = m * h;
    const double dist_t = (p.powers - result.p_star).norm();
    result.times.push_back(t);
    result.distances.push_back(dist_t);
    if (result.bound_checked)
      result.slack = std::max(result.slack, dist_t - d0 * std::exp(-result.tau_hat * t));
    if (m < steps)
      p = project_profile({p.powers + h * pool_gradient(pool, p, cfg)}, cfg);
  }
  return result;
}

namespace {

long telescoping_walk(const RunLog& log, const Eigen::MatrixXd& ref, double c_hat,
                      double tol, RunLog* annotate) {
  if (!log.has_learner_fields)
    throw ConfigError("telescoping audit: log lacks gradient/step fields");
  if (log.rows.empty()) return 0;
  const int users = static_cast<int>(log.p0.rows());
  if (ref.rows() != log.p0.rows() || ref.cols() != log.p0.cols())
    throw ConfigError("telescoping audit: reference shape mismatch");
  if (c_hat <= 0.0) {
    double dir_max = 0.0;
    for (const auto& row : log.rows) dir_max = std::max(dir_max, row.dir_max_norm);
    c_hat = 1.01 * dir_max;
  }

  long violations = 0;
  const Eigen::MatrixXd* prev = &log.p0;
  for (size_t t = 0; t < log.rows.size(); ++t) {
    const RunRow& row = log.rows[t];
    if (row.step.size() != static_cast<Eigen::Index>(users) || row.grad_next.size() == 0 ||
        row.eps.size() != static_cast<Eigen::Index>(users))
      throw ConfigError("telescoping audit: row is missing learner fields");
    const double lhs = (row.p - ref).squaredNorm();
    double rhs = (*prev - ref).squaredNorm();
    rhs += 5.0 * c_hat * c_hat * row.step.squaredNorm();
    for (int i = 0; i < users; ++i) {
      rhs += 2.0 * row.step(i) * row.eps(i);
      rhs -= 2.0 * row.step(i) *
             row.grad_next.row(i).dot(ref.row(i) - prev->row(i));
    }
    if (lhs > rhs + tol) ++violations;
    if (annotate != nullptr) {
      annotate->rows[t].bound_lhs = lhs;
      annotate->rows[t].bound_rhs = rhs;
    }
    prev = &row.p;
  }
  return violations;
}

}  // namespace

long audit_telescoping(const RunLog& log, const Eigen::MatrixXd& ref, double c_hat,
                       double tol) {
  return telescoping_walk(log, ref, c_hat, tol, nullptr);
}

long annotate_telescoping(RunLog& log, const Eigen::MatrixXd& ref, double c_hat,
                          double tol) {
  return telescoping_walk(log, ref, c_hat, tol, &log);
}

std::string DiagnosticsReport::to_text() const {
  std::ostringstream os;
  os << "coupling matrix pd fraction " << gamma.pd_fraction << " (min lambda "
     << gamma.min_lambda << ", min tau " << gamma.tau_min << ")\n";
  os << "tau at mean gains " << tau_mean << "\n";
  os << "lipschitz estimate " << lipschitz << "\n";
  if (stable_step > 0.0)
    os << "largest certified constant step " << stable_step << "\n";
  else
    os << "no constant step certified (tau <= 0)\n";
  os << "telescoping audit violations " << audit_violations << "\n";
  if (pds_checked)
    os << "projected-dynamics envelope slack " << pds_slack << "\n";
  else
    os << "projected-dynamics envelope skipped (no positive modulus)\n";
  for (const auto& note : notes) os << note << "\n";
  return os.str();
}

}  // namespace pgic
