#include "hnoma/channel.hpp"
#include "hnoma/csv.hpp"
#include "hnoma/errors.hpp"
#include "hnoma/reference.hpp"
#include "hnoma/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <sstream>

namespace hnoma::reference {
namespace {

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.4g", v);
    return buf;
}

polar::CrcSpec parity_crc() {
    polar::CrcSpec crc;
    crc.bits = 1;
    crc.polynomial = 0x3; // x + 1
    crc.initial = 0;
    return crc;
}

// A spec whose info set is the full block, for driving the raw transform.
polar::PolarCodeSpec transparent_spec(int n) {
    polar::PolarCodeSpec spec;
    spec.block_length = n;
    spec.crc = parity_crc();
    spec.message_bits = n - 1;
    spec.info_set.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) spec.info_set[static_cast<std::size_t>(i)] = i;
    spec.construction = "manual";
    return spec;
}

CheckResult check_crc_vectors() {
    CheckResult r{"crc-test-vectors", false, ""};
    const auto crc = polar::CrcSpec::ccitt16();

    // ASCII "123456789", most significant bit of each byte first.
    std::vector<std::uint8_t> bits;
    for (char c : std::string("123456789"))
        for (int b = 7; b >= 0; --b) bits.push_back(static_cast<std::uint8_t>((c >> b) & 1));
    const auto frame = polar::crc_encode(bits, crc);
    std::uint64_t checksum = 0;
    for (std::size_t i = bits.size(); i < frame.size(); ++i)
        checksum = (checksum << 1) | frame[i];
    if (checksum != 0x31C3) {
        r.detail = "checksum of the standard vector was " + fmt(static_cast<double>(checksum));
        return r;
    }
    if (!polar::crc_check(frame, crc)) {
        r.detail = "self-check of an encoded frame failed";
        return r;
    }

    // Every single-bit corruption of a 64-bit message must be caught.
    auto rng = RandomStream::derive(101, {0});
    std::vector<std::uint8_t> msg(64);
    for (auto& b : msg) b = static_cast<std::uint8_t>(rng.next_u64() & 1);
    auto encoded = polar::crc_encode(msg, crc);
    for (std::size_t i = 0; i < encoded.size(); ++i) {
        encoded[i] ^= 1;
        const bool caught = !polar::crc_check(encoded, crc);
        encoded[i] ^= 1;
        if (!caught) {
            r.detail = "missed a single-bit corruption at position " + std::to_string(i);
            return r;
        }
    }
    r.pass = true;
    r.detail = "standard vector 0x31c3, all single-bit corruptions caught";
    return r;
}

CheckResult check_polar_kernels() {
    CheckResult r{"polar-encoder-kernels", false, ""};
    const auto spec2 = transparent_spec(2);
    const auto spec4 = transparent_spec(4);

    const std::vector<std::uint8_t> u10 = {1, 0}, u01 = {0, 1}, u0001 = {0, 0, 0, 1};
    if (polar::polar_encode(u10, spec2) != std::vector<std::uint8_t>{1, 0} ||
        polar::polar_encode(u01, spec2) != std::vector<std::uint8_t>{1, 1}) {
        r.detail = "2x2 kernel mismatch";
        return r;
    }
    if (polar::polar_encode(u0001, spec4) != std::vector<std::uint8_t>{1, 1, 1, 1}) {
        r.detail = "order-4 transform mismatch";
        return r;
    }

    // The transform is an involution: encoding twice restores the input.
    auto rng = RandomStream::derive(102, {0});
    const auto spec64 = transparent_spec(64);
    std::vector<std::uint8_t> u(64);
    for (auto& b : u) b = static_cast<std::uint8_t>(rng.next_u64() & 1);
    if (polar::polar_encode(polar::polar_encode(u, spec64), spec64) != u) {
        r.detail = "double transform did not restore the input";
        return r;
    }
    r.pass = true;
    r.detail = "kernel vectors and involution hold";
    return r;
}

CheckResult check_construction_order() {
    CheckResult r{"polar-construction-order", false, ""};
    const auto spec =
        polar::construct_monte_carlo(4, 2, 2.0, 20000, 11, parity_crc(), 1);
    const bool best = std::find(spec.info_set.begin(), spec.info_set.end(), 3) != spec.info_set.end();
    const bool worst =
        std::find(spec.frozen_set.begin(), spec.frozen_set.end(), 0) != spec.frozen_set.end();
    if (!best || !worst) {
        r.detail = "expected index 3 info and index 0 frozen";
        return r;
    }
    r.pass = true;
    r.detail = "index 3 most reliable, index 0 least reliable";
    return r;
}

CheckResult check_scl_matches_sc() {
    CheckResult r{"list-decoder-matches-sc", false, ""};
    auto spec = polar::construct_monte_carlo(64, 32 + 16, 2.0, 5000, 7);
    spec.list_size = 1;

    const double snr = std::pow(10.0, 2.0 / 10.0);
    const double noise_var = 1.0 / (2.0 * snr);
    const double sigma = std::sqrt(noise_var);
    const double scale = 2.0 / noise_var;

    for (int frame = 0; frame < 1000; ++frame) {
        auto rng = RandomStream::derive(103, {static_cast<std::uint64_t>(frame)});
        std::vector<std::uint8_t> msg(static_cast<std::size_t>(spec.message_bits));
        for (auto& b : msg) b = static_cast<std::uint8_t>(rng.next_u64() & 1);
        const auto codeword = polar::encode_frame(msg, spec);

        std::vector<double> llrs(codeword.size());
        for (std::size_t i = 0; i < codeword.size(); ++i) {
            const double tx = codeword[i] ? -1.0 : 1.0;
            llrs[i] = scale * (tx + sigma * rng.next_gaussian());
        }

        const auto scl = polar::scl_decode(llrs, spec);
        const auto sc = sc_decode(llrs, spec);
        if (scl.decisions != sc) {
            r.detail = "decision divergence at frame " + std::to_string(frame);
            return r;
        }
    }
    r.pass = true;
    r.detail = "1000 noisy frames decoded identically at list size 1";
    return r;
}

CheckResult check_noiseless_roundtrip() {
    CheckResult r{"noiseless-roundtrip", false, ""};
    for (int n : {64, 256}) {
        auto spec = polar::construct_monte_carlo(n, n / 2, 2.0, 2000, 7);
        for (int frame = 0; frame < 25; ++frame) {
            auto rng = RandomStream::derive(104, {static_cast<std::uint64_t>(n),
                                                  static_cast<std::uint64_t>(frame)});
            std::vector<std::uint8_t> msg(static_cast<std::size_t>(spec.message_bits));
            for (auto& b : msg) b = static_cast<std::uint8_t>(rng.next_u64() & 1);
            const auto codeword = polar::encode_frame(msg, spec);
            std::vector<double> llrs(codeword.size());
            for (std::size_t i = 0; i < codeword.size(); ++i) llrs[i] = codeword[i] ? -30.0 : 30.0;
            const auto out = polar::scl_decode(llrs, spec);
            if (out.message != msg || !out.crc_pass || out.path_metric != 0.0) {
                r.detail = "n=" + std::to_string(n) + " frame " + std::to_string(frame) +
                           " did not decode cleanly";
                return r;
            }
        }
    }
    r.pass = true;
    r.detail = "clean decodes at n=64 and n=256";
    return r;
}

CheckResult check_mpa_exact(bool cycle_free) {
    CheckResult r{cycle_free ? "detector-exact-on-tree" : "detector-matches-enumeration", false, ""};
    const int users = cycle_free ? 4 : 6;
    const int degree = cycle_free ? 1 : 2;
    const auto graph = scma::build_factor_graph(users, 4, degree);
    const auto cb = scma::generate_codebook(graph, 4);

    const double snr = std::pow(10.0, 8.0 / 10.0);
    const double n0 = 1.0 / snr;
    const std::vector<double> nu(4, n0);

    double worst_tv = 0.0, sum_tv = 0.0;
    int agree = 0, total = 0;
    for (int inst = 0; inst < 50; ++inst) {
        auto rng = RandomStream::derive(105, {static_cast<std::uint64_t>(cycle_free),
                                              static_cast<std::uint64_t>(inst)});
        std::vector<int> symbols(static_cast<std::size_t>(users));
        std::vector<scma::cplx> gains(static_cast<std::size_t>(users));
        for (int j = 0; j < users; ++j) {
            symbols[static_cast<std::size_t>(j)] = static_cast<int>(rng.next_pow2(4));
            gains[static_cast<std::size_t>(j)] = rng.next_cgaussian(1.0);
        }
        auto received = scma::scma_encode(cb, symbols);
        for (int j = 0; j < users; ++j) {
            const auto& cw = cb.codeword(j, symbols[static_cast<std::size_t>(j)]);
            for (int z = 0; z < 4; ++z)
                received[static_cast<std::size_t>(z)] +=
                    (gains[static_cast<std::size_t>(j)] - 1.0) * cw[static_cast<std::size_t>(z)];
        }
        for (auto& y : received) y += rng.next_cgaussian(n0);

        const auto approx = scma::mpa_detect(received, gains, cb, nu, 10);
        const auto exact = exact_marginals(received, gains, cb, nu);
        for (int j = 0; j < users; ++j) {
            double tv = 0.0;
            for (int s = 0; s < 4; ++s)
                tv += std::abs(approx[static_cast<std::size_t>(j)][static_cast<std::size_t>(s)] -
                               exact[static_cast<std::size_t>(j)][static_cast<std::size_t>(s)]);
            tv *= 0.5;
            worst_tv = std::max(worst_tv, tv);
            sum_tv += tv;
            agree += scma::hard_decision(approx[static_cast<std::size_t>(j)]) ==
                     scma::hard_decision(exact[static_cast<std::size_t>(j)]);
            ++total;
        }
    }
    const double mean_tv = sum_tv / total;
    // Loopy BP's converged argmax agreement is about 0.987 here; 0.97 is a
    // floor every correct implementation clears regardless of the sample.
    const double needed_agreement = cycle_free ? 1.0 : 0.97;
    const double agreement = static_cast<double>(agree) / total;
    // Loopy graphs admit local worst cases; the honest figure of merit is the
    // mean deviation.  Trees must be numerically exact.
    r.pass = (cycle_free ? worst_tv <= 1e-9 : mean_tv <= 0.05) && agreement >= needed_agreement;
    r.detail = "mean total variation " + fmt(mean_tv) + " (worst " + fmt(worst_tv) +
               "), argmax agreement " + fmt(agreement);
    return r;
}

CheckResult check_channel_statistics() {
    CheckResult r{"channel-statistics", false, ""};
    const int n = 100000;

    auto rng = RandomStream::derive(106, {0});
    double power = 0.0;
    for (int i = 0; i < n; ++i) power += std::norm(channel::sample_fading(rng, 1.0));
    power /= n;
    if (std::abs(power - 1.0) > 0.02) {
        r.detail = "fading power " + fmt(power) + " deviates from 1";
        return r;
    }

    // rho=1 at 9.54.. dB (linear 9) gives an exact error variance of 0.1.
    auto rng2 = RandomStream::derive(106, {1});
    double err_power = 0.0, est_power = 0.0;
    double reported = 0.0;
    for (int i = 0; i < n; ++i) {
        const auto h = channel::sample_fading(rng2, 1.0);
        const auto cs = channel::apply_csi_error(h, 1.0, 9.0, 1.0, rng2);
        err_power += std::norm(h - cs.estimate);
        est_power += std::norm(cs.estimate);
        reported = cs.error_variance;
    }
    err_power /= n;
    est_power /= n;
    if (std::abs(reported - 0.1) > 1e-12) {
        r.detail = "reported error variance " + fmt(reported) + " is not 0.1";
        return r;
    }
    if (std::abs(err_power - 0.1) > 0.005 || std::abs(est_power - 1.1) > 0.03) {
        r.detail = "measured error power " + fmt(err_power) + ", estimate power " + fmt(est_power);
        return r;
    }

    // Perfect knowledge leaves the coefficient untouched.
    auto rng3 = RandomStream::derive(106, {2});
    const auto h = channel::sample_fading(rng3, 1.0);
    const auto perfect =
        channel::apply_csi_error(h, std::numeric_limits<double>::infinity(), 9.0, 1.0, rng3);
    if (perfect.estimate != h || perfect.error_variance != 0.0) {
        r.detail = "infinite quality changed the estimate";
        return r;
    }

    auto rng4 = RandomStream::derive(106, {3});
    std::vector<scma::cplx> zeros(1, 0.0);
    double noise_power = 0.0;
    for (int i = 0; i < n; ++i)
        noise_power += std::norm(channel::add_awgn(zeros, 0.25, rng4)[0]);
    noise_power /= n;
    if (std::abs(noise_power - 0.25) > 0.01) {
        r.detail = "awgn power " + fmt(noise_power) + " deviates from 0.25";
        return r;
    }

    r.pass = true;
    r.detail = "fading power " + fmt(power) + ", csi error power " + fmt(err_power) +
               ", awgn power " + fmt(noise_power);
    return r;
}

CheckResult check_rng_uniformity() {
    CheckResult r{"rng-uniformity", false, ""};
    const int n = 10000;
    auto rng = RandomStream::derive(107, {0});
    std::vector<double> u(n);
    for (double& v : u) v = rng.next_unit();
    std::sort(u.begin(), u.end());
    double d = 0.0;
    for (int i = 0; i < n; ++i) {
        d = std::max(d, std::abs((i + 1.0) / n - u[static_cast<std::size_t>(i)]));
        d = std::max(d, std::abs(u[static_cast<std::size_t>(i)] - static_cast<double>(i) / n));
    }
    const double threshold = 1.63 / std::sqrt(static_cast<double>(n));
    r.pass = d <= threshold;
    r.detail = "ks statistic " + fmt(d) + " against threshold " + fmt(threshold);
    return r;
}

CheckResult check_results_roundtrip() {
    CheckResult r{"results-roundtrip", false, ""};
    std::vector<sim::Record> records;
    const double values[] = {0.5, 0.123456789, 1e-4, 0.0, 1.0, 0.0999995};
    int i = 0;
    for (double v : values) {
        sim::Record rec;
        rec.scenario_id = "00deadbeef001234";
        rec.snr_db = 2.5 * i++;
        rec.group = 1 + (i % 2);
        rec.metric = i % 2 ? "ber" : "ser";
        rec.value = v;
        rec.trials = 100000;
        rec.errors = static_cast<long>(v * 100000);
        rec.ci95 = v / 10;
        records.push_back(rec);
    }
    const std::string first = sim::to_csv(records);
    const std::string second = sim::to_csv(sim::parse_csv(first));
    r.pass = first == second;
    r.detail = r.pass ? "serialise-parse-serialise is byte identical"
                      : "round trip changed the text";
    return r;
}

CheckResult check_frozen_file(const std::string& path) {
    CheckResult r{"frozen-set-file", false, ""};
    namespace fs = std::filesystem;
    try {
        polar::PolarCodeSpec spec;
        fs::path file;
        if (path.empty()) {
            spec = polar::construct_monte_carlo(128, 64 + 16, 2.0, 2000, 7);
            file = fs::temp_directory_path() / "hnoma_frozen_check.txt";
            polar::save_frozen_set(file, spec);
        } else {
            file = path;
            spec = polar::load_frozen_set(file);
        }
        const auto loaded = polar::load_frozen_set(file);
        const fs::path copy = fs::temp_directory_path() / "hnoma_frozen_copy.txt";
        polar::save_frozen_set(copy, loaded);
        const auto reloaded = polar::load_frozen_set(copy);
        if (path.empty()) fs::remove(file);
        fs::remove(copy);

        if (loaded.frozen_set != spec.frozen_set || reloaded.frozen_set != loaded.frozen_set ||
            reloaded.info_set != loaded.info_set) {
            r.detail = "sets changed across save/load";
            return r;
        }
        r.pass = true;
        r.detail = "frozen set of n=" + std::to_string(loaded.block_length) +
                   " survived save/load/save";
        return r;
    } catch (const std::exception& e) {
        r.detail = e.what();
        return r;
    }
}

} // namespace

std::vector<CheckResult> run_validation(const std::string& frozen_set_path) {
    std::vector<CheckResult> results;
    results.push_back(check_crc_vectors());
    results.push_back(check_polar_kernels());
    results.push_back(check_construction_order());
    results.push_back(check_scl_matches_sc());
    results.push_back(check_noiseless_roundtrip());
    results.push_back(check_mpa_exact(true));
    results.push_back(check_mpa_exact(false));
    results.push_back(check_channel_statistics());
    results.push_back(check_rng_uniformity());
    results.push_back(check_results_roundtrip());
    results.push_back(check_frozen_file(frozen_set_path));
    return results;
}

} // namespace hnoma::reference
