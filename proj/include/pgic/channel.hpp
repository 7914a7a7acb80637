// Per-slot channel quantities: sampling, SINR, achievable rates, received
// signal fractions, rate gradients, and the interference-coupling matrix that
// drives the strong-monotonicity diagnostics.
#pragma once

#include <Eigen/Core>

#include "pgic/rng.hpp"
#include "pgic/types.hpp"

namespace pgic {

// Draws one realization, entrywise uniform on [mean*(1-ups), mean*(1+ups)].
// Draw order is fixed (channel-major, then receiver row, then transmitter
// column; one uniform per entry) so a stream position maps to one slot.
ChannelRealization sample_realization(const ChannelDistribution& dist, RngStream& rng);

// SINR of user j on channel k: direct power over noise plus cross interference.
double sinr(const ChannelRealization& g, const PowerProfile& p,
            const NetworkConfig& cfg, int j, int k);

// Achievable rate of user j in nats: sum over channels of ln(1 + SINR).
double rate(const ChannelRealization& g, const PowerProfile& p,
            const NetworkConfig& cfg, int j);

// All users' rates stacked into a vector.
Eigen::VectorXd rates(const ChannelRealization& g, const PowerProfile& p,
                      const NetworkConfig& cfg);

// Fraction of the total received power (noise + everyone's signal) at receiver
// j that is j's own signal, per channel. Values lie in [0, 1).
Eigen::VectorXd signal_fraction(const ChannelRealization& g, const PowerProfile& p,
                                const NetworkConfig& cfg, int j);

// Partial derivatives of user j's rate with respect to its own powers:
// d rate_j / d p_j^k = g_jj / (noise + total received power). This equals
// signal_fraction/p entrywise when p > 0 and stays finite at p = 0.
Eigen::VectorXd rate_gradient(const ChannelRealization& g, const PowerProfile& p,
                              const NetworkConfig& cfg, int j);

// Stacked gradient, one row per user.
Eigen::MatrixXd rate_gradient_all(const ChannelRealization& g, const PowerProfile& p,
                                  const NetworkConfig& cfg);

// Interference-coupling matrix for one realization: ones on the diagonal, and
// entry (i, j), i != j, is minus the worst case over channels of
//   (g_ij / g_jj) * (noise_j + sum_{l} g_jl * cap_l) / noise_i
// with caps the effective per-channel limits. Positive definiteness of this
// matrix certifies strong monotonicity of the game's gradient field.
Eigen::MatrixXd gamma_matrix(const ChannelRealization& g, const NetworkConfig& cfg);

// Strong-monotonicity modulus estimate for one realization:
//   lambda_min((Gamma + Gamma^T)/2) / (max_{i,k} kappa_i^k)^2
// where kappa_i^k = (noise_i + sum_j g_ij * cap_j) / g_ii. May be negative,
// in which case no contraction certificate exists for this draw.
double tau(const ChannelRealization& g, const NetworkConfig& cfg);

}  // namespace pgic
