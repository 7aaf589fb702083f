#include "hnoma/reference.hpp"

#include "hnoma/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace hnoma::reference {
namespace {

// Same functional form as the production decoder; duplicated here so that the
// two code paths stay independent while agreeing bit for bit.
double check_llr(double a, double b) {
    const double am = std::abs(a);
    const double bm = std::abs(b);
    const double mn = std::min(am, bm);
    const double mx = std::max(am, bm);
    const double mag = mn + std::log1p(std::exp(-(am + bm))) - std::log1p(std::exp(-(mx - mn)));
    return ((a < 0.0) != (b < 0.0)) ? -mag : mag;
}

std::vector<std::uint8_t> sc_recurse(std::span<const double> llrs, int base,
                                     const std::vector<std::uint8_t>& frozen,
                                     std::vector<std::uint8_t>& decisions) {
    const std::size_t n = llrs.size();
    if (n == 1) {
        const std::uint8_t bit =
            frozen[static_cast<std::size_t>(base)] ? 0 : (llrs[0] < 0.0 ? 1 : 0);
        decisions[static_cast<std::size_t>(base)] = bit;
        return {bit};
    }
    const std::size_t h = n / 2;

    std::vector<double> upper(h);
    for (std::size_t i = 0; i < h; ++i) upper[i] = check_llr(llrs[i], llrs[i + h]);
    const auto left = sc_recurse(upper, base, frozen, decisions);

    std::vector<double> lower(h);
    for (std::size_t i = 0; i < h; ++i)
        lower[i] = left[i] ? llrs[i + h] - llrs[i] : llrs[i + h] + llrs[i];
    const auto right = sc_recurse(lower, base + static_cast<int>(h), frozen, decisions);

    std::vector<std::uint8_t> codeword(n);
    for (std::size_t i = 0; i < h; ++i) {
        codeword[i] = left[i] ^ right[i];
        codeword[i + h] = right[i];
    }
    return codeword;
}

} // namespace

std::vector<scma::SymbolPosterior> exact_marginals(std::span<const scma::cplx> received,
                                                   std::span<const scma::cplx> gains,
                                                   const scma::Codebook& codebook,
                                                   std::span<const double> noise_variance) {
    const int users = codebook.users();
    const int resources = codebook.resources();
    const int order = codebook.order;
    if (std::ssize(received) != resources) throw InputError("received length mismatch");
    if (std::ssize(gains) != users) throw InputError("gain length mismatch");
    if (std::ssize(noise_variance) != resources) throw InputError("noise length mismatch");

    double total_hypotheses = std::pow(static_cast<double>(order), users);
    if (total_hypotheses > 1e8) throw ConfigError("joint enumeration too large");
    const long count = static_cast<long>(total_hypotheses);

    std::vector<double> logw(static_cast<std::size_t>(count));
    std::vector<int> symbol(static_cast<std::size_t>(users), 0);
    double max_logw = -std::numeric_limits<double>::infinity();

    for (long idx = 0; idx < count; ++idx) {
        long rest = idx;
        for (int j = 0; j < users; ++j) {
            symbol[static_cast<std::size_t>(j)] = static_cast<int>(rest % order);
            rest /= order;
        }
        double e = 0.0;
        for (int z = 0; z < resources; ++z) {
            scma::cplx sum = 0.0;
            for (int j = 0; j < users; ++j)
                sum += gains[static_cast<std::size_t>(j)] *
                       codebook.codeword(j, symbol[static_cast<std::size_t>(j)])
                           [static_cast<std::size_t>(z)];
            const scma::cplx diff = received[static_cast<std::size_t>(z)] - sum;
            e -= std::norm(diff) / noise_variance[static_cast<std::size_t>(z)];
        }
        logw[static_cast<std::size_t>(idx)] = e;
        max_logw = std::max(max_logw, e);
    }

    std::vector<scma::SymbolPosterior> marginals(
        static_cast<std::size_t>(users),
        scma::SymbolPosterior(static_cast<std::size_t>(order), 0.0));
    for (long idx = 0; idx < count; ++idx) {
        const double w = std::exp(logw[static_cast<std::size_t>(idx)] - max_logw);
        long rest = idx;
        for (int j = 0; j < users; ++j) {
            marginals[static_cast<std::size_t>(j)][static_cast<std::size_t>(rest % order)] += w;
            rest /= order;
        }
    }
    for (auto& m : marginals) {
        double sum = 0.0;
        for (double v : m) sum += v;
        for (double& v : m) v /= sum;
    }
    return marginals;
}

std::vector<std::uint8_t> sc_decode(std::span<const double> channel_llrs,
                                    const polar::PolarCodeSpec& spec) {
    spec.validate();
    if (std::ssize(channel_llrs) != spec.block_length)
        throw InputError("channel llr length must equal the block length");

    std::vector<std::uint8_t> frozen(static_cast<std::size_t>(spec.block_length), 1);
    for (int idx : spec.info_set) frozen[static_cast<std::size_t>(idx)] = 0;

    std::vector<std::uint8_t> decisions(static_cast<std::size_t>(spec.block_length), 0);
    std::vector<double> llrs(channel_llrs.begin(), channel_llrs.end());
    sc_recurse(llrs, 0, frozen, decisions);
    return decisions;
}

} // namespace hnoma::reference
