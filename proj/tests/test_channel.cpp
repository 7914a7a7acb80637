#include <cmath>

#include "doctest.h"
#include "oracles.hpp"
#include "pgic/analysis.hpp"
#include "pgic/channel.hpp"
#include "scenarios.hpp"

using namespace pgic;

namespace {

// All users at unit power on the strongly-coupled instance, one channel.
struct BenchSlice {
  NetworkConfig cfg;
  ChannelRealization g;
  PowerProfile p;

  BenchSlice() {
    cfg.users = 4;
    cfg.channels = 1;
    cfg.noise = Eigen::MatrixXd::Constant(4, 1, 0.025);
    cfg.p_max = Eigen::VectorXd::Constant(4, 40.0);
    cfg.mask = Eigen::MatrixXd::Constant(4, 1, kInf);
    Eigen::MatrixXd m = Eigen::MatrixXd::Constant(4, 4, 0.75);
    m.diagonal().setConstant(15.0);
    g.gains.push_back(m);
    p = PowerProfile{Eigen::MatrixXd::Constant(4, 1, 1.0)};
  }
};

}  // namespace

TEST_CASE("sinr, rate, and signal fraction on a hand-checked slice") {
  const BenchSlice s;
  // Direct 15*1 over noise 0.025 plus three interferers at 0.75 each.
  CHECK(sinr(s.g, s.p, s.cfg, 0, 0) == doctest::Approx(15.0 / 2.275).epsilon(1e-12));
  CHECK(rate(s.g, s.p, s.cfg, 0) == doctest::Approx(std::log(1.0 + 15.0 / 2.275)).epsilon(1e-12));
  // The fraction denominator also counts the user's own received power.
  CHECK(signal_fraction(s.g, s.p, s.cfg, 0)(0) ==
        doctest::Approx(15.0 / 17.275).epsilon(1e-12));
  // At unit power the gradient coincides with the fraction.
  CHECK(rate_gradient(s.g, s.p, s.cfg, 0)(0) ==
        doctest::Approx(15.0 / 17.275).epsilon(1e-12));
}

TEST_CASE("silent channels have zero sinr and fraction but a live gradient") {
  BenchSlice s;
  s.p.powers(0, 0) = 0.0;
  CHECK(sinr(s.g, s.p, s.cfg, 0, 0) == 0.0);
  CHECK(signal_fraction(s.g, s.p, s.cfg, 0)(0) == 0.0);
  CHECK(rate(s.g, s.p, s.cfg, 0) == 0.0);
  CHECK(rate_gradient(s.g, s.p, s.cfg, 0)(0) ==
        doctest::Approx(15.0 / 2.275).epsilon(1e-12));
}

TEST_CASE("rates vector matches the per-user rate") {
  const BenchSlice s;
  const Eigen::VectorXd r = rates(s.g, s.p, s.cfg);
  for (int j = 0; j < 4; ++j) CHECK(r(j) == rate(s.g, s.p, s.cfg, j));
}

TEST_CASE("gradient matches central finite differences at interior points") {
  const auto inst = scenarios::weak4();
  RngStream rng(31, StreamDomain::feasible_points);
  RngStream draws(32, StreamDomain::channel_draws);
  for (int trial = 0; trial < 100; ++trial) {
    const ChannelRealization g = sample_realization(inst.dist, draws);
    PowerProfile p = sample_feasible(inst.cfg, rng);
    // Keep every coordinate strictly interior so central differences stay
    // inside the domain.
    p.powers = p.powers.cwiseMax(0.05).cwiseMin(0.45);
    for (int j = 0; j < inst.cfg.users; ++j) {
      const Eigen::VectorXd exact = rate_gradient(g, p, inst.cfg, j);
      const Eigen::VectorXd fd = oracles::fd_rate_gradient(g, p, inst.cfg, j);
      CHECK((exact - fd).norm() / exact.norm() < 1e-6);
    }
  }
}

TEST_CASE("signal fractions stay in the unit interval") {
  const auto inst = scenarios::bench4();
  RngStream rng(77, StreamDomain::feasible_points);
  RngStream draws(78, StreamDomain::channel_draws);
  for (int trial = 0; trial < 200; ++trial) {
    const ChannelRealization g = sample_realization(inst.dist, draws);
    const PowerProfile p = sample_feasible(inst.cfg, rng);
    for (int j = 0; j < inst.cfg.users; ++j) {
      const Eigen::VectorXd f = signal_fraction(g, p, inst.cfg, j);
      CHECK(f.minCoeff() >= 0.0);
      CHECK(f.maxCoeff() < 1.0);
    }
  }
}

TEST_CASE("rate is concave in a user's own powers") {
  const auto inst = scenarios::weak4();
  RngStream rng(55, StreamDomain::feasible_points);
  RngStream draws(56, StreamDomain::channel_draws);
  for (int trial = 0; trial < 100; ++trial) {
    const ChannelRealization g = sample_realization(inst.dist, draws);
    PowerProfile x = sample_feasible(inst.cfg, rng);
    PowerProfile y = x;
    const PowerProfile other = sample_feasible(inst.cfg, rng);
    const int j = trial % inst.cfg.users;
    y.powers.row(j) = other.powers.row(j);
    PowerProfile mid = x;
    mid.powers.row(j) = 0.5 * (x.powers.row(j) + y.powers.row(j));
    const double lhs = rate(g, mid, inst.cfg, j);
    const double rhs = 0.5 * (rate(g, x, inst.cfg, j) + rate(g, y, inst.cfg, j));
    CHECK(lhs >= rhs - 1e-12);
  }
}

TEST_CASE("coupling matrix closed forms on the two-user instance") {
  const auto inst = scenarios::duo();
  const ChannelRealization g = inst.dist.mean_realization();
  const Eigen::MatrixXd gamma = gamma_matrix(g, inst.cfg);
  CHECK(gamma(0, 0) == 1.0);
  CHECK(gamma(1, 1) == 1.0);
  // (0.1/1) * (1 + 1*1 + 0.1*1) / 1 with both caps at the budget.
  CHECK(gamma(0, 1) == doctest::Approx(-0.21).epsilon(1e-12));
  CHECK(gamma(1, 0) == doctest::Approx(-0.21).epsilon(1e-12));
  CHECK(tau(g, inst.cfg) == doctest::Approx(0.79 / 4.41).epsilon(1e-12));
}

TEST_CASE("decoupled users give the identity coupling matrix") {
  auto inst = scenarios::duo();
  inst.dist.mean[0](0, 1) = 0.0;
  inst.dist.mean[0](1, 0) = 0.0;
  const ChannelRealization g = inst.dist.mean_realization();
  CHECK(gamma_matrix(g, inst.cfg).isApprox(Eigen::MatrixXd::Identity(2, 2)));
  // kappa = (1 + 1) / 1 = 2, so the modulus is 1/4.
  CHECK(tau(g, inst.cfg) == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("strong coupling yields a negative modulus") {
  auto inst = scenarios::duo();
  inst.dist.mean[0](0, 1) = 2.0;
  inst.dist.mean[0](1, 0) = 2.0;
  const ChannelRealization g = inst.dist.mean_realization();
  CHECK(tau(g, inst.cfg) < 0.0);
}

TEST_CASE("zero spread reproduces the mean gains exactly") {
  auto inst = scenarios::weak4(0.0);
  RngStream rng(3, StreamDomain::channel_draws);
  const ChannelRealization g = sample_realization(inst.dist, rng);
  for (int k = 0; k < inst.cfg.channels; ++k)
    CHECK((g.gains[static_cast<size_t>(k)] - inst.dist.mean[static_cast<size_t>(k)])
              .cwiseAbs()
              .maxCoeff() == 0.0);
}

TEST_CASE("gain draws respect the spread and average to the mean") {
  auto inst = scenarios::bench4(0.2);
  RngStream rng(11, StreamDomain::channel_draws);
  double sum_direct = 0.0;
  const int trials = 4000;
  for (int t = 0; t < trials; ++t) {
    const ChannelRealization g = sample_realization(inst.dist, rng);
    for (int k = 0; k < 4; ++k) {
      const auto& gk = g.gains[static_cast<size_t>(k)];
      for (int j = 0; j < 4; ++j) {
        CHECK(gk(j, j) >= 12.0);
        CHECK(gk(j, j) <= 18.0);
      }
    }
    sum_direct += g.gains[0](0, 0);
  }
  CHECK(std::abs(sum_direct / trials - 15.0) < 0.1);
}

TEST_CASE("realization sampling is reproducible per stream") {
  const auto inst = scenarios::weak4();
  RngStream a(9, StreamDomain::channel_draws);
  RngStream b(9, StreamDomain::channel_draws);
  const ChannelRealization ga = sample_realization(inst.dist, a);
  const ChannelRealization gb = sample_realization(inst.dist, b);
  for (int k = 0; k < 4; ++k)
    CHECK((ga.gains[static_cast<size_t>(k)] - gb.gains[static_cast<size_t>(k)])
              .cwiseAbs()
              .maxCoeff() == 0.0);
}
