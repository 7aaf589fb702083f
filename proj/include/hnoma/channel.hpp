#pragma once

#include "hnoma/rng.hpp"

#include <complex>
#include <span>
#include <vector>

namespace hnoma::channel {

using cplx = std::complex<double>;

// One flat Rayleigh gain h ~ CN(0, gain_variance).
cplx sample_fading(RandomStream& rng, double gain_variance);

struct CsiSample {
    cplx estimate;         // h_est
    double error_variance; // realised sigma_e^2
};

// Imperfect-estimation model: the error e ~ CN(0, sigma_e^2) is drawn
// independently of h and the receiver's estimate is h_est = h - e, with
// sigma_e^2 = gain_variance / (1 + rho * snr_linear).  rho = +infinity gives
// the perfect-CSI limit h_est = h, sigma_e^2 = 0 exactly (no randoms drawn).
// Finite rho must be positive.
CsiSample apply_csi_error(cplx actual, double rho, double snr_linear, double gain_variance,
                          RandomStream& rng);

// Adds CN(0, noise_variance) per entry; noise_variance = 0 is the identity.
std::vector<cplx> add_awgn(std::vector<cplx> signal, double noise_variance, RandomStream& rng);

// Channel state for one transmission interval: per (group, user) the actual
// gain, the receiver-side estimate, and the estimation-error variance in
// force for that group.
struct ChannelRealization {
    std::vector<std::vector<cplx>> actual;    // [group][user]
    std::vector<std::vector<cplx>> estimated; // [group][user]
    std::vector<double> error_variance;       // [group], sigma_e^2
    double gain_variance = 1.0;               // sigma_h^2
};

} // namespace hnoma::channel
