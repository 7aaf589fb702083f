#include "hnoma/channel.hpp"

#include "hnoma/errors.hpp"

#include <cmath>

namespace hnoma::channel {

cplx sample_fading(RandomStream& rng, double gain_variance) {
    if (!(gain_variance > 0.0) || !std::isfinite(gain_variance))
        throw ConfigError("fading variance must be positive and finite");
    return rng.next_cgaussian(gain_variance);
}

CsiSample apply_csi_error(cplx actual, double rho, double snr_linear, double gain_variance,
                          RandomStream& rng) {
    if (std::isnan(rho) || rho <= 0.0)
        throw ConfigError("estimation quality rho must be positive (or +inf for perfect CSI)");
    if (!(snr_linear > 0.0) || !std::isfinite(snr_linear))
        throw ConfigError("snr must be positive and finite");
    if (!(gain_variance > 0.0) || !std::isfinite(gain_variance))
        throw ConfigError("fading variance must be positive and finite");

    if (std::isinf(rho)) return {actual, 0.0};

    const double error_variance = gain_variance / (1.0 + rho * snr_linear);
    const cplx error = rng.next_cgaussian(error_variance);
    return {actual - error, error_variance};
}

std::vector<cplx> add_awgn(std::vector<cplx> signal, double noise_variance, RandomStream& rng) {
    if (noise_variance < 0.0 || !std::isfinite(noise_variance))
        throw ConfigError("noise variance must be non-negative and finite");
    if (noise_variance == 0.0) return signal;
    for (cplx& v : signal) v += rng.next_cgaussian(noise_variance);
    return signal;
}

} // namespace hnoma::channel
