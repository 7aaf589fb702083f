#include "hnoma/receiver.hpp"

#include "hnoma/errors.hpp"

#include <cmath>

namespace hnoma {
namespace {

void check_group(const GroupConfig& g) {
    if (!g.codebook) throw ConfigError("group is missing its codebook");
    if (g.id != 1 && g.id != 2) throw ConfigError("group id must be 1 (far) or 2 (near)");
    if (!(g.power >= 0.0) || !std::isfinite(g.power))
        throw ConfigError("group power must be non-negative and finite");
}

void check_pair(const GroupConfig& far, const GroupConfig& near) {
    check_group(far);
    check_group(near);
    if (far.id != 1 || near.id != 2)
        throw ConfigError("superposition takes exactly the far (1) and near (2) group");
    if (!(near.power > far.power))
        throw ConfigError("the near group must be received at higher power than the far group");
    if (far.codebook->resources() != near.codebook->resources())
        throw ConfigError("both groups must share the same resource block");
}

void check_gains(const channel::ChannelRealization& ch, std::size_t group, int users) {
    if (ch.actual.size() <= group || ch.estimated.size() <= group)
        throw InputError("channel realization is missing a group");
    if (std::ssize(ch.actual[group]) != users || std::ssize(ch.estimated[group]) != users)
        throw InputError("channel realization has the wrong number of user gains");
}

} // namespace

std::vector<scma::cplx> superpose(std::span<const std::vector<int>> symbols,
                                  std::span<const GroupConfig> groups,
                                  const channel::ChannelRealization& ch) {
    if (symbols.size() != groups.size())
        throw InputError("superpose expects one symbol vector per group");
    if (groups.empty()) throw InputError("superpose needs at least one group");

    const int Z = groups[0].codebook->resources();
    std::vector<scma::cplx> y(static_cast<std::size_t>(Z), scma::cplx{0.0, 0.0});
    for (std::size_t k = 0; k < groups.size(); ++k) {
        const GroupConfig& g = groups[k];
        check_group(g);
        if (g.codebook->resources() != Z)
            throw InputError("groups disagree on the number of resources");
        if (std::ssize(symbols[k]) != g.users())
            throw InputError("superpose expects one symbol per user");
        check_gains(ch, k, g.users());

        const double amp = std::sqrt(g.power);
        for (int j = 0; j < g.users(); ++j) {
            const auto& word = g.codebook->codeword(j, symbols[k][static_cast<std::size_t>(j)]);
            const scma::cplx gain = amp * ch.actual[k][static_cast<std::size_t>(j)];
            for (int z = 0; z < Z; ++z) y[static_cast<std::size_t>(z)] += gain * word[static_cast<std::size_t>(z)];
        }
    }
    return y;
}

std::vector<double> effective_stage1_noise(double noise_power,
                                           const GroupConfig& far,
                                           const channel::ChannelRealization& ch) {
    check_group(far);
    if (far.id != 1) throw ConfigError("stage-1 interference comes from the far group");
    if (!(noise_power > 0.0) || !std::isfinite(noise_power))
        throw ConfigError("noise power must be positive and finite");
    check_gains(ch, 0, far.users());

    const auto& graph = far.codebook->graph;
    std::vector<double> nu(static_cast<std::size_t>(graph.resources), noise_power);
    for (int z = 0; z < graph.resources; ++z)
        for (int j : graph.resource_users[static_cast<std::size_t>(z)])
            nu[static_cast<std::size_t>(z)] +=
                far.power * std::norm(ch.estimated[0][static_cast<std::size_t>(j)]) / graph.user_degree;
    return nu;
}

std::vector<scma::cplx> sic_subtract(std::span<const scma::cplx> received,
                                     std::span<const int> near_decisions,
                                     const GroupConfig& near,
                                     const channel::ChannelRealization& ch) {
    check_group(near);
    if (near.id != 2) throw ConfigError("interference cancellation removes the near group");
    if (std::ssize(near_decisions) != near.users())
        throw InputError("one decision per near-group user required");
    if (std::ssize(received) != near.codebook->resources())
        throw InputError("received vector length must equal resources");
    check_gains(ch, 1, near.users());

    std::vector<scma::cplx> residual(received.begin(), received.end());
    const double amp = std::sqrt(near.power);
    for (int j = 0; j < near.users(); ++j) {
        const auto& word = near.codebook->codeword(j, near_decisions[static_cast<std::size_t>(j)]);
        const scma::cplx gain = amp * ch.estimated[1][static_cast<std::size_t>(j)];
        for (int z = 0; z < near.codebook->resources(); ++z)
            residual[static_cast<std::size_t>(z)] -= gain * word[static_cast<std::size_t>(z)];
    }
    return residual;
}

ReceiverOutput hnoma_receive(std::span<const scma::cplx> received,
                             const GroupConfig& far,
                             const GroupConfig& near,
                             const channel::ChannelRealization& ch,
                             double noise_power,
                             int mpa_iterations) {
    check_pair(far, near);
    if (std::ssize(received) != near.codebook->resources())
        throw InputError("received vector length must equal resources");
    check_gains(ch, 0, far.users());
    check_gains(ch, 1, near.users());

    ReceiverOutput out;
    out.posteriors.resize(2);
    out.decisions.resize(2);

    // Stage 1: near group with the far group folded into the noise.
    out.stage1_noise = effective_stage1_noise(noise_power, far, ch);
    std::vector<scma::cplx> near_gains(static_cast<std::size_t>(near.users()));
    const double near_amp = std::sqrt(near.power);
    for (int j = 0; j < near.users(); ++j)
        near_gains[static_cast<std::size_t>(j)] = near_amp * ch.estimated[1][static_cast<std::size_t>(j)];

    out.posteriors[1] = scma::mpa_detect(received, near_gains, *near.codebook,
                                         out.stage1_noise, mpa_iterations);
    out.decisions[1].resize(static_cast<std::size_t>(near.users()));
    for (int j = 0; j < near.users(); ++j)
        out.decisions[1][static_cast<std::size_t>(j)] =
            scma::hard_decision(out.posteriors[1][static_cast<std::size_t>(j)]);

    // Stage 2: cancel the near group, detect the far group at the noise floor.
    out.residual = sic_subtract(received, out.decisions[1], near, ch);
    out.sic_applied = true;

    std::vector<scma::cplx> far_gains(static_cast<std::size_t>(far.users()));
    const double far_amp = std::sqrt(far.power);
    for (int j = 0; j < far.users(); ++j)
        far_gains[static_cast<std::size_t>(j)] = far_amp * ch.estimated[0][static_cast<std::size_t>(j)];
    const std::vector<double> floor_noise(static_cast<std::size_t>(far.codebook->resources()),
                                          noise_power);

    out.posteriors[0] = scma::mpa_detect(out.residual, far_gains, *far.codebook,
                                         floor_noise, mpa_iterations);
    out.decisions[0].resize(static_cast<std::size_t>(far.users()));
    for (int j = 0; j < far.users(); ++j)
        out.decisions[0][static_cast<std::size_t>(j)] =
            scma::hard_decision(out.posteriors[0][static_cast<std::size_t>(j)]);

    return out;
}

PowerSplit split_power(double ratio_db) {
    if (!(ratio_db > 0.0) || !std::isfinite(ratio_db))
        throw ConfigError("power ratio must be positive (near group louder than far)");
    const double ratio = std::pow(10.0, ratio_db / 10.0);
    PowerSplit split;
    split.far = 2.0 / (1.0 + ratio);
    split.near = 2.0 * ratio / (1.0 + ratio);
    return split;
}

} // namespace hnoma
