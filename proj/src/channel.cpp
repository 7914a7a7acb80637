#include "pgic/channel.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

namespace pgic {

ChannelRealization sample_realization(const ChannelDistribution& dist, RngStream& rng) {
  ChannelRealization out;
  out.gains.reserve(dist.mean.size());
  const double lo = 1.0 - dist.upsilon;
  const double hi = 1.0 + dist.upsilon;
  for (const auto& m : dist.mean) {
    Eigen::MatrixXd gk(m.rows(), m.cols());
    for (Eigen::Index j = 0; j < m.rows(); ++j)
      for (Eigen::Index i = 0; i < m.cols(); ++i)
        gk(j, i) = m(j, i) * rng.uniform(lo, hi);
    out.gains.push_back(std::move(gk));
  }
  return out;
}

namespace {

// Noise plus cross interference seen by receiver j on channel k.
double cross_interference(const ChannelRealization& g, const PowerProfile& p,
                          const NetworkConfig& cfg, int j, int k) {
  const auto& gk = g.gains[k];
  double acc = cfg.noise(j, k);
  for (int i = 0; i < cfg.users; ++i)
    if (i != j) acc += gk(j, i) * p.powers(i, k);
  return acc;
}

// Same plus the user's own received power (the full power at receiver j).
double total_received(const ChannelRealization& g, const PowerProfile& p,
                      const NetworkConfig& cfg, int j, int k) {
  return cross_interference(g, p, cfg, j, k) + g.gains[k](j, j) * p.powers(j, k);
}

}  // namespace

double sinr(const ChannelRealization& g, const PowerProfile& p,
            const NetworkConfig& cfg, int j, int k) {
  return g.gains[k](j, j) * p.powers(j, k) / cross_interference(g, p, cfg, j, k);
}

double rate(const ChannelRealization& g, const PowerProfile& p,
            const NetworkConfig& cfg, int j) {
  double r = 0.0;
  for (int k = 0; k < cfg.channels; ++k) r += std::log1p(sinr(g, p, cfg, j, k));
  return r;
}

Eigen::VectorXd rates(const ChannelRealization& g, const PowerProfile& p,
                      const NetworkConfig& cfg) {
  Eigen::VectorXd out(cfg.users);
  for (int j = 0; j < cfg.users; ++j) out(j) = rate(g, p, cfg, j);
  return out;
}

Eigen::VectorXd signal_fraction(const ChannelRealization& g, const PowerProfile& p,
                                const NetworkConfig& cfg, int j) {
  Eigen::VectorXd f(cfg.channels);
  for (int k = 0; k < cfg.channels; ++k)
    f(k) = g.gains[k](j, j) * p.powers(j, k) / total_received(g, p, cfg, j, k);
  return f;
}

Eigen::VectorXd rate_gradient(const ChannelRealization& g, const PowerProfile& p,
                              const NetworkConfig& cfg, int j) {
  Eigen::VectorXd s(cfg.channels);
  for (int k = 0; k < cfg.channels; ++k)
    s(k) = g.gains[k](j, j) / total_received(g, p, cfg, j, k);
  return s;
}

Eigen::MatrixXd rate_gradient_all(const ChannelRealization& g, const PowerProfile& p,
                                  const NetworkConfig& cfg) {
  Eigen::MatrixXd s(cfg.users, cfg.channels);
  for (int j = 0; j < cfg.users; ++j) s.row(j) = rate_gradient(g, p, cfg, j).transpose();
  return s;
}

Eigen::MatrixXd gamma_matrix(const ChannelRealization& g, const NetworkConfig& cfg) {
  const int n = cfg.users;
  Eigen::MatrixXd gamma = Eigen::MatrixXd::Identity(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      double worst = 0.0;
      for (int k = 0; k < cfg.channels; ++k) {
        const auto& gk = g.gains[k];
        double received_j = cfg.noise(j, k);
        for (int l = 0; l < n; ++l) received_j += gk(j, l) * cfg.effective_mask(l, k);
        const double c = (gk(i, j) / gk(j, j)) * received_j / cfg.noise(i, k);
        if (c > worst) worst = c;
      }
      gamma(i, j) = -worst;
    }
  }
  return gamma;
}

double tau(const ChannelRealization& g, const NetworkConfig& cfg) {
  const Eigen::MatrixXd gamma = gamma_matrix(g, cfg);
  const Eigen::MatrixXd sym = 0.5 * (gamma + gamma.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym, Eigen::EigenvaluesOnly);
  const double lambda_min = es.eigenvalues().minCoeff();

  double kappa_max = 0.0;
  for (int i = 0; i < cfg.users; ++i) {
    for (int k = 0; k < cfg.channels; ++k) {
      const auto& gk = g.gains[k];
      double received = cfg.noise(i, k);
      for (int j = 0; j < cfg.users; ++j) received += gk(i, j) * cfg.effective_mask(j, k);
      const double kappa = received / gk(i, i);
      if (kappa > kappa_max) kappa_max = kappa;
    }
  }
  return lambda_min / (kappa_max * kappa_max);
}

}  // namespace pgic
