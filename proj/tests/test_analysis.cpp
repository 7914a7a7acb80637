#include <cmath>

#include "doctest.h"
#include "pgic/analysis.hpp"
#include "pgic/learners.hpp"
#include "pgic/projection.hpp"
#include "scenarios.hpp"

using namespace pgic;

TEST_CASE("normalized error ratio") {
  Eigen::MatrixXd ref(1, 2);
  ref << 3.0, 4.0;  // norm 5
  Eigen::MatrixXd p(1, 2);
  p << 3.0, 3.0;
  CHECK(nse(ref, ref) == 0.0);
  CHECK(nse(p, ref) == doctest::Approx(0.2));
  CHECK_THROWS_AS(nse(p, Eigen::MatrixXd::Zero(1, 2)), ConfigError);
}

TEST_CASE("equilibrium solver reduces to water-filling for one user") {
  pgic::NetworkConfig cfg;
  cfg.users = 1;
  cfg.channels = 2;
  cfg.noise = (Eigen::MatrixXd(1, 2) << 1.0, 2.0).finished();
  cfg.p_max = Eigen::VectorXd::Constant(1, 3.0);
  cfg.mask = Eigen::MatrixXd::Constant(1, 2, kInf);
  pgic::ChannelDistribution dist;
  dist.upsilon = 0.0;
  dist.mean.push_back((Eigen::MatrixXd(1, 1) << 1.0).finished());
  dist.mean.push_back((Eigen::MatrixXd(1, 1) << 1.0).finished());

  for (const NeMethod method : {NeMethod::mean_channel, NeMethod::sample_average}) {
    OracleSettings settings;
    settings.method = method;
    settings.n_samples = 50;
    const NeSolution ne = solve_ne(cfg, dist, settings);
    CHECK(ne.p_star(0, 0) == doctest::Approx(2.0).epsilon(1e-7));
    CHECK(ne.p_star(0, 1) == doctest::Approx(1.0).epsilon(1e-7));
    CHECK(ne.residual <= settings.tol);
  }
}

TEST_CASE("mean-channel and sample-average agree at zero spread") {
  const auto inst = scenarios::weak4(0.0);
  OracleSettings mean_settings;
  mean_settings.method = NeMethod::mean_channel;
  OracleSettings saa_settings;
  saa_settings.method = NeMethod::sample_average;
  saa_settings.n_samples = 10;
  const NeSolution a = solve_ne(inst.cfg, inst.dist, mean_settings);
  const NeSolution b = solve_ne(inst.cfg, inst.dist, saa_settings);
  CHECK((a.p_star - b.p_star).cwiseAbs().maxCoeff() < 1e-7);
  // The equilibrium profile is feasible and spends the whole budget.
  CHECK(PowerProfile{a.p_star}.in_feasible_set(inst.cfg, 1e-9));
  for (int j = 0; j < 4; ++j)
    CHECK(a.p_star.row(j).sum() == doctest::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("symmetric games have symmetric equilibria") {
  // Two users, one channel, fully symmetric: both rows of the equilibrium
  // must coincide (and the budget binds since rates increase in own power).
  const auto inst = scenarios::duo();
  OracleSettings settings;
  settings.method = NeMethod::sample_average;
  settings.n_samples = 1;
  const NeSolution ne = solve_ne(inst.cfg, inst.dist, settings);
  CHECK(ne.p_star(0, 0) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(ne.p_star(1, 0) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("oracle failure surfaces as an error") {
  const auto inst = scenarios::weak4();
  OracleSettings settings;
  settings.max_sweeps = 0;
  CHECK_THROWS_AS(solve_ne(inst.cfg, inst.dist, settings), OracleError);
}

TEST_CASE("sampled draws certify definiteness on the weak instance only") {
  const auto weak = scenarios::weak4();
  const GammaPdReport ok = check_gamma_pd(weak.cfg, weak.dist, 200, 5);
  CHECK(ok.pd_fraction == 1.0);
  CHECK(ok.min_lambda > 0.0);
  CHECK(ok.tau_min > 0.0);

  auto strong = scenarios::duo();
  strong.dist.mean[0](0, 1) = 2.0;
  strong.dist.mean[0](1, 0) = 2.0;
  const GammaPdReport bad = check_gamma_pd(strong.cfg, strong.dist, 50, 5);
  CHECK(bad.pd_fraction == 0.0);
  CHECK(bad.min_lambda < 0.0);
}

TEST_CASE("feasible sampling really is feasible") {
  const auto inst = scenarios::weak4();
  RngStream rng(66, StreamDomain::feasible_points);
  for (int i = 0; i < 500; ++i)
    CHECK(sample_feasible(inst.cfg, rng).in_feasible_set(inst.cfg, 1e-12));
}

TEST_CASE("lipschitz estimate brackets the single-link closed form") {
  // One user, one channel, unit gain and noise: the field is 1/(1+p) whose
  // steepest secant slope on [0, 2] approaches 1 near the origin, and no
  // secant anywhere can exceed 1.
  pgic::NetworkConfig cfg;
  cfg.users = 1;
  cfg.channels = 1;
  cfg.noise = Eigen::MatrixXd::Constant(1, 1, 1.0);
  cfg.p_max = Eigen::VectorXd::Constant(1, 2.0);
  cfg.mask = Eigen::MatrixXd::Constant(1, 1, kInf);
  pgic::ChannelDistribution dist;
  dist.upsilon = 0.0;
  dist.mean.push_back((Eigen::MatrixXd(1, 1) << 1.0).finished());

  const double few = estimate_lipschitz(cfg, dist, 50, 1, 12);
  const double many = estimate_lipschitz(cfg, dist, 400, 1, 12);
  CHECK(many <= 1.0 + 1e-9);
  CHECK(many > 0.5);
  CHECK(many >= few);  // nested sampling can only raise the max
}

TEST_CASE("projected dynamics decay inside the exponential envelope") {
  const auto inst = scenarios::weak4(0.0);
  PowerProfile p0 = PowerProfile::zero(inst.cfg);
  // Start far from the equilibrium: each user dumps its budget on channel 0.
  for (int j = 0; j < 4; ++j) p0.powers(j, 0) = 2.0;
  const PdsResult r = pds_integrate(inst.cfg, inst.dist, p0, 20.0, -1.0, 1, 5);
  REQUIRE(r.bound_checked);
  CHECK(r.tau_hat > 0.0);
  CHECK(r.slack <= 0.1 * r.distances.front());
  for (size_t i = 1; i < r.distances.size(); ++i)
    CHECK(r.distances[i] <= r.distances[i - 1] + 1e-12);
  CHECK(r.distances.back() < 1e-3 * r.distances.front());
}

TEST_CASE("projected dynamics stay put at the equilibrium") {
  const auto inst = scenarios::weak4(0.0);
  OracleSettings settings;
  settings.method = NeMethod::mean_channel;
  settings.tol = 1e-11;
  const NeSolution ne = solve_ne(inst.cfg, inst.dist, settings);
  const PdsResult r =
      pds_integrate(inst.cfg, inst.dist, PowerProfile{ne.p_star}, 2.0, 0.01, 1, 5);
  for (const double d : r.distances) CHECK(d < 1e-7);
}

TEST_CASE("telescoping audit accepts honest runs and flags corrupted ones") {
  const auto inst = scenarios::weak4();
  OracleSettings settings;
  settings.n_samples = 200;
  const NeSolution ne = solve_ne(inst.cfg, inst.dist, settings);
  const std::vector<StepSchedule> sched{StepSchedule::harmonic(0.5)};
  RunLog log = run_learner(inst.cfg, inst.dist, PowerProfile::uniform(inst.cfg), 300,
                           sched, NoiseModel::none(), Averaging::off, -1, 4, &ne.p_star);
  CHECK(audit_telescoping(log, ne.p_star, -1.0) == 0);
  CHECK(annotate_telescoping(log, ne.p_star, -1.0) == 0);
  CHECK(log.rows[10].bound_rhs >= log.rows[10].bound_lhs);

  // Any feasible reference point satisfies the same inequality.
  RngStream rng(91, StreamDomain::feasible_points);
  const PowerProfile other = sample_feasible(inst.cfg, rng);
  CHECK(audit_telescoping(log, other.powers, -1.0) == 0);

  // Teleporting one iterate far from where the step could reach must trip it.
  RunLog corrupted = log;
  corrupted.rows[100].p = Eigen::MatrixXd::Zero(4, 4);
  CHECK(audit_telescoping(corrupted, ne.p_star, -1.0) >= 1);
}

TEST_CASE("telescoping audit rejects logs without learner fields") {
  const auto inst = scenarios::weak4();
  const RunLog log = iwfa_run(inst.cfg, inst.dist, PowerProfile::uniform(inst.cfg), 5,
                              IwfaOrder::sequential, 1);
  CHECK_THROWS_AS(audit_telescoping(log, Eigen::MatrixXd::Zero(4, 4), -1.0), ConfigError);
}

TEST_CASE("diagnostics report renders every section") {
  DiagnosticsReport report;
  report.gamma = {1.0, 0.5, 0.01};
  report.tau_mean = 0.12;
  report.lipschitz = 3.0;
  report.stable_step = stable_step_bound(0.12, 3.0);
  report.audit_violations = 0;
  report.pds_checked = true;
  report.pds_slack = 0.0;
  report.notes.push_back("note line");
  const std::string text = report.to_text();
  CHECK(text.find("pd fraction") != std::string::npos);
  CHECK(text.find("note line") != std::string::npos);
  CHECK(text.find("certified constant step") != std::string::npos);
}
