#pragma once

#include "hnoma/channel.hpp"
#include "hnoma/scma.hpp"

#include <memory>
#include <span>
#include <vector>

namespace hnoma {

// One power-domain group of SCMA users.  Group 1 is the far (low-power)
// group, group 2 the near (high-power) group decoded first.
struct GroupConfig {
    int id = 0; // 1 = far, 2 = near
    std::shared_ptr<const scma::Codebook> codebook;
    double power = 1.0; // p_k, linear

    int users() const { return codebook->users(); }
};

// y_z = sum_k sqrt(p_k) sum_j h_{k,j} x_{k,j,z}(s_{k,j}) using the actual
// channel gains.  symbols[k][j] selects user j of group k's codeword.
std::vector<scma::cplx> superpose(std::span<const std::vector<int>> symbols,
                                  std::span<const GroupConfig> groups,
                                  const channel::ChannelRealization& ch);

// Per-resource noise power the near-group detector sees when the far group
// is treated as Gaussian interference:
//   nu_z = N0 + p_far * sum_{far users j on z} |h_est_{far,j}|^2 / d_v.
// Uses estimated gains (the receiver's knowledge of the far group).
std::vector<double> effective_stage1_noise(double noise_power,
                                           const GroupConfig& far,
                                           const channel::ChannelRealization& ch);

// Removes the near group's reconstructed contribution
//   residual_z = y_z - sqrt(p_near) sum_j h_est_{near,j} x_{near,j,z}(s_hat_j)
// using the estimated gains.
std::vector<scma::cplx> sic_subtract(std::span<const scma::cplx> received,
                                     std::span<const int> near_decisions,
                                     const GroupConfig& near,
                                     const channel::ChannelRealization& ch);

struct ReceiverOutput {
    // Indexed [group][user]; group 0 = far, group 1 = near.
    std::vector<std::vector<scma::SymbolPosterior>> posteriors;
    std::vector<std::vector<int>> decisions;
    std::vector<scma::cplx> residual;   // input to the far-group detector
    std::vector<double> stage1_noise;   // per-resource nu seen by stage 1
    bool sic_applied = false;
};

// Two-stage reception: detect the near group with the far group absorbed
// into the noise term, subtract the near group's hard decisions, then detect
// the far group against the thermal noise floor.  Only estimated gains are
// consulted.  Requires exactly the far/near pair with p_near > p_far >= 0.
ReceiverOutput hnoma_receive(std::span<const scma::cplx> received,
                             const GroupConfig& far,
                             const GroupConfig& near,
                             const channel::ChannelRealization& ch,
                             double noise_power,
                             int mpa_iterations);

// Power split for a total budget of 2 and ratio p_near/p_far (dB > 0).
struct PowerSplit {
    double far = 0.0;
    double near = 0.0;
};
PowerSplit split_power(double ratio_db);

} // namespace hnoma
