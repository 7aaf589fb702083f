#include "hnoma/sim.hpp"

#include "hnoma/channel.hpp"
#include "hnoma/errors.hpp"
#include "hnoma/format.hpp"
#include "hnoma/receiver.hpp"
#include "hnoma/rng.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <memory>
#include <sstream>
#include <thread>

namespace hnoma::sim {
namespace {

constexpr std::uint64_t kStreamData = 0;
constexpr std::uint64_t kStreamFading = 1;
constexpr std::uint64_t kStreamCsi = 2;
constexpr std::uint64_t kStreamNoise = 3;

bool is_pow2(int v) { return v > 0 && (v & (v - 1)) == 0; }

int bits_per_symbol(int order) {
    int m = 0;
    while ((1 << (m + 1)) <= order) ++m;
    return m;
}

} // namespace

const char* mode_name(Mode mode) {
    switch (mode) {
        case Mode::UncodedScma: return "uncoded-scma";
        case Mode::UncodedHnoma: return "uncoded-hnoma";
        case Mode::CodedScma: return "coded-scma";
        case Mode::CodedHnoma: return "coded-hnoma";
    }
    throw InternalError("unreachable mode");
}

Mode mode_from_name(const std::string& name) {
    if (name == "uncoded-scma") return Mode::UncodedScma;
    if (name == "uncoded-hnoma") return Mode::UncodedHnoma;
    if (name == "coded-scma") return Mode::CodedScma;
    if (name == "coded-hnoma") return Mode::CodedHnoma;
    throw SchemaError("unknown mode '" + name +
                      "' (expected uncoded-scma, uncoded-hnoma, coded-scma or coded-hnoma)");
}

int PolarParams::info_count() const { return static_cast<int>(std::lround(block_length * rate)); }

double ScenarioConfig::overload_factor() const {
    int total = 0;
    for (const GroupSpec& g : groups) total += g.users;
    return static_cast<double>(total) / resources;
}

std::vector<std::string> ScenarioConfig::problems() const {
    std::vector<std::string> out;
    const std::size_t expected_groups = hybrid() ? 2 : 1;
    if (groups.size() != expected_groups)
        out.push_back("mode " + std::string(mode_name(mode)) + " requires exactly " +
                      std::to_string(expected_groups) + " group(s), got " +
                      std::to_string(groups.size()));
    for (std::size_t k = 0; k < groups.size(); ++k) {
        const GroupSpec& g = groups[k];
        if (g.users < 1)
            out.push_back("groups[" + std::to_string(k) + "].users must be >= 1");
        else if (resources >= 1 && user_degree >= 1 && (g.users * user_degree) % resources != 0)
            out.push_back("groups[" + std::to_string(k) + "].users*" +
                          std::to_string(user_degree) + " must be divisible by resources=" +
                          std::to_string(resources));
        if (std::isnan(g.rho) || g.rho <= 0.0)
            out.push_back("groups[" + std::to_string(k) + "] rho must be positive or inf");
    }
    if (resources < 1) out.push_back("resources must be >= 1");
    if (!is_pow2(modulation_order) || modulation_order < 2)
        out.push_back("modulation_order must be a power of two >= 2");
    if (user_degree < 1 || user_degree > resources)
        out.push_back("user degree must lie in [1, resources]");
    if (mpa_iterations < 1) out.push_back("mpa_iterations must be >= 1");
    if (snr_db.empty()) out.push_back("snr_db grid must not be empty");
    for (std::size_t i = 0; i + 1 < snr_db.size(); ++i)
        if (!(snr_db[i] < snr_db[i + 1])) {
            out.push_back("snr_db grid must be strictly increasing");
            break;
        }
    for (double s : snr_db)
        if (!std::isfinite(s)) {
            out.push_back("snr_db values must be finite");
            break;
        }
    if (trials < 1) out.push_back("trials must be >= 1");
    if (hybrid() && (!(power_ratio_db > 0.0) || !std::isfinite(power_ratio_db)))
        out.push_back("power_ratio_db must be positive and finite");
    if (!(gain_variance > 0.0) || !std::isfinite(gain_variance))
        out.push_back("sigma_h2 must be positive and finite");

    if (coded()) {
        const int m = bits_per_symbol(modulation_order);
        if (!is_pow2(polar.block_length) || polar.block_length < 2)
            out.push_back("polar.n must be a power of two >= 2");
        else if (polar.block_length % m != 0)
            out.push_back("polar.n must be divisible by the bits per symbol");
        if (!(polar.rate > 0.0) || polar.rate > 1.0)
            out.push_back("polar.rate must lie in (0, 1]");
        else if (is_pow2(polar.block_length)) {
            const int info = polar.info_count();
            if (info > polar.block_length)
                out.push_back("polar info bits exceed the block length");
            if (info - 16 < 1)
                out.push_back("polar.n*rate must leave at least one message bit after the CRC");
        }
        if (polar.list_size < 1) out.push_back("polar.list_size must be >= 1");
        if (polar.construction_trials < 1000)
            out.push_back("polar.construction_trials must be >= 1000");
        if (!std::isfinite(polar.design_snr_db))
            out.push_back("polar.design_snr_db must be finite");
    }
    return out;
}

void ScenarioConfig::validate() const {
    const auto issues = problems();
    if (issues.empty()) return;
    std::string joined = "invalid scenario configuration:";
    for (const std::string& p : issues) joined += "\n  - " + p;
    throw ConfigError(joined);
}

std::string ScenarioConfig::canonical_string() const {
    std::string s;
    s += "mode=";
    s += mode_name(mode);
    s += ";groups=";
    for (std::size_t k = 0; k < groups.size(); ++k) {
        if (k) s += ',';
        s += std::to_string(groups[k].users);
        s += ':';
        s += std::isinf(groups[k].rho) ? "inf" : format_double(groups[k].rho);
    }
    s += ";Z=" + std::to_string(resources);
    s += ";M=" + std::to_string(modulation_order);
    s += ";dv=" + std::to_string(user_degree);
    s += ";T=" + std::to_string(mpa_iterations);
    s += ";snr=";
    for (std::size_t i = 0; i < snr_db.size(); ++i) {
        if (i) s += ',';
        s += format_double(snr_db[i]);
    }
    s += ";trials=" + std::to_string(trials);
    if (hybrid()) s += ";ratio_db=" + format_double(power_ratio_db);
    s += ";sigma_h2=" + format_double(gain_variance);
    if (coded()) {
        s += ";polar=" + std::to_string(polar.block_length) + ":" + format_double(polar.rate) +
             ":" + std::to_string(polar.list_size) + ":" + format_double(polar.design_snr_db) +
             ":" + std::to_string(polar.construction_trials) + ":" +
             std::to_string(polar.construction_seed);
        s += ";fading=";
        s += coded_fading == FadingDynamics::PerFrame ? "per-frame" : "per-symbol";
    }
    s += ";seed=" + std::to_string(seed);
    return s;
}

std::uint64_t ScenarioConfig::fingerprint() const {
    // FNV-1a over the canonical text.
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : canonical_string()) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return h;
}

std::string ScenarioConfig::scenario_id() const {
    static const char* digits = "0123456789abcdef";
    std::uint64_t fp = fingerprint();
    std::string s(16, '0');
    for (int i = 15; i >= 0; --i) {
        s[static_cast<std::size_t>(i)] = digits[fp & 0xF];
        fp >>= 4;
    }
    return s;
}

double MetricCount::ci95() const {
    if (total <= 0) return 0.0;
    const double p = rate();
    return 1.96 * std::sqrt(p * (1.0 - p) / static_cast<double>(total));
}

namespace {

struct PointTally {
    std::vector<GroupPointStats> groups;

    explicit PointTally(std::size_t n) : groups(n) {}

    void merge(const PointTally& other) {
        for (std::size_t k = 0; k < groups.size(); ++k) {
            groups[k].symbols.errors += other.groups[k].symbols.errors;
            groups[k].symbols.total += other.groups[k].symbols.total;
            groups[k].bits.errors += other.groups[k].bits.errors;
            groups[k].bits.total += other.groups[k].bits.total;
            groups[k].frames.errors += other.groups[k].frames.errors;
            groups[k].frames.total += other.groups[k].frames.total;
        }
    }
};

// Everything fixed across the trials of one SNR point.
struct PointContext {
    const ScenarioConfig* config = nullptr;
    std::size_t point_index = 0;
    double snr_linear = 0.0;
    double noise_power = 0.0; // N0
    std::vector<double> powers; // per group, aligned with config->groups
    std::vector<std::shared_ptr<const scma::Codebook>> codebooks;
    const polar::PolarCodeSpec* code = nullptr; // coded modes
    scma::BitMapping mapping;
};

channel::ChannelRealization draw_channels(const PointContext& ctx, std::uint64_t trial) {
    const ScenarioConfig& cfg = *ctx.config;
    channel::ChannelRealization ch;
    ch.gain_variance = cfg.gain_variance;
    ch.actual.resize(cfg.groups.size());
    ch.estimated.resize(cfg.groups.size());
    ch.error_variance.resize(cfg.groups.size());
    for (std::size_t k = 0; k < cfg.groups.size(); ++k) {
        const int users = cfg.groups[k].users;
        ch.actual[k].resize(static_cast<std::size_t>(users));
        ch.estimated[k].resize(static_cast<std::size_t>(users));
        for (int j = 0; j < users; ++j) {
            auto fading = RandomStream::derive(
                cfg.seed, {ctx.point_index, trial, kStreamFading, k + 1, static_cast<std::uint64_t>(j)});
            auto csi = RandomStream::derive(
                cfg.seed, {ctx.point_index, trial, kStreamCsi, k + 1, static_cast<std::uint64_t>(j)});
            const auto h = channel::sample_fading(fading, cfg.gain_variance);
            const auto est = channel::apply_csi_error(h, cfg.groups[k].rho, ctx.snr_linear,
                                                      cfg.gain_variance, csi);
            ch.actual[k][static_cast<std::size_t>(j)] = h;
            ch.estimated[k][static_cast<std::size_t>(j)] = est.estimate;
            ch.error_variance[k] = est.error_variance;
        }
    }
    return ch;
}

std::vector<GroupConfig> make_groups(const PointContext& ctx) {
    const ScenarioConfig& cfg = *ctx.config;
    std::vector<GroupConfig> groups(cfg.groups.size());
    for (std::size_t k = 0; k < cfg.groups.size(); ++k) {
        groups[k].id = cfg.hybrid() ? static_cast<int>(k) + 1 : 2;
        groups[k].codebook = ctx.codebooks[k];
        groups[k].power = ctx.powers[k];
    }
    return groups;
}

// Detects all groups for one received vector; shared by the uncoded and the
// coded slot loop.  Returns posteriors indexed [group][user].
std::vector<std::vector<scma::SymbolPosterior>> detect(const PointContext& ctx,
                                                       const std::vector<GroupConfig>& groups,
                                                       const channel::ChannelRealization& ch,
                                                       std::span<const scma::cplx> received) {
    const ScenarioConfig& cfg = *ctx.config;
    if (cfg.hybrid()) {
        auto out = hnoma_receive(received, groups[0], groups[1], ch, ctx.noise_power,
                                 cfg.mpa_iterations);
        return std::move(out.posteriors);
    }
    const GroupConfig& g = groups[0];
    std::vector<scma::cplx> gains(static_cast<std::size_t>(g.users()));
    const double amp = std::sqrt(g.power);
    for (int j = 0; j < g.users(); ++j)
        gains[static_cast<std::size_t>(j)] = amp * ch.estimated[0][static_cast<std::size_t>(j)];
    const std::vector<double> nu(static_cast<std::size_t>(cfg.resources), ctx.noise_power);
    std::vector<std::vector<scma::SymbolPosterior>> posteriors(1);
    posteriors[0] = scma::mpa_detect(received, gains, *g.codebook, nu, cfg.mpa_iterations);
    return posteriors;
}

void run_uncoded_trial(const PointContext& ctx, std::uint64_t trial, PointTally& tally) {
    const ScenarioConfig& cfg = *ctx.config;
    const int m = bits_per_symbol(cfg.modulation_order);

    std::vector<std::vector<int>> symbols(cfg.groups.size());
    for (std::size_t k = 0; k < cfg.groups.size(); ++k) {
        symbols[k].resize(static_cast<std::size_t>(cfg.groups[k].users));
        for (int j = 0; j < cfg.groups[k].users; ++j) {
            auto data = RandomStream::derive(
                cfg.seed, {ctx.point_index, trial, kStreamData, k + 1, static_cast<std::uint64_t>(j)});
            symbols[k][static_cast<std::size_t>(j)] =
                static_cast<int>(data.next_pow2(static_cast<std::uint32_t>(cfg.modulation_order)));
        }
    }

    const auto ch = draw_channels(ctx, trial);
    const auto groups = make_groups(ctx);
    auto received = superpose(symbols, groups, ch);
    auto noise = RandomStream::derive(cfg.seed, {ctx.point_index, trial, kStreamNoise, 0, 0});
    received = channel::add_awgn(std::move(received), ctx.noise_power, noise);

    const auto posteriors = detect(ctx, groups, ch, received);
    for (std::size_t k = 0; k < cfg.groups.size(); ++k) {
        auto& stats = tally.groups[k];
        for (int j = 0; j < cfg.groups[k].users; ++j) {
            const int sent = symbols[k][static_cast<std::size_t>(j)];
            const int got = scma::hard_decision(posteriors[k][static_cast<std::size_t>(j)]);
            stats.symbols.total += 1;
            stats.symbols.errors += sent != got;
            stats.bits.total += m;
            stats.bits.errors += std::popcount(static_cast<unsigned>(sent ^ got));
        }
    }
}

void run_coded_trial(const PointContext& ctx, std::uint64_t trial, PointTally& tally) {
    const ScenarioConfig& cfg = *ctx.config;
    const polar::PolarCodeSpec& code = *ctx.code;
    const int m = bits_per_symbol(cfg.modulation_order);
    const int slots = code.block_length / m;
    const bool per_frame = cfg.coded_fading == FadingDynamics::PerFrame;

    // Source bits, codewords and symbol streams per user.
    struct UserFrame {
        std::vector<std::uint8_t> message;
        std::vector<int> symbols;
        std::vector<double> llrs;
    };
    std::vector<std::vector<UserFrame>> frames(cfg.groups.size());
    for (std::size_t k = 0; k < cfg.groups.size(); ++k) {
        frames[k].resize(static_cast<std::size_t>(cfg.groups[k].users));
        for (int j = 0; j < cfg.groups[k].users; ++j) {
            auto data = RandomStream::derive(
                cfg.seed, {ctx.point_index, trial, kStreamData, k + 1, static_cast<std::uint64_t>(j)});
            UserFrame& f = frames[k][static_cast<std::size_t>(j)];
            f.message.resize(static_cast<std::size_t>(code.message_bits));
            for (auto& bit : f.message) bit = static_cast<std::uint8_t>(data.next_u64() & 1u);
            f.symbols = polar::frame_to_symbols(polar::encode_frame(f.message, code), m);
            f.llrs.reserve(static_cast<std::size_t>(code.block_length));
        }
    }

    const auto groups = make_groups(ctx);
    auto noise = RandomStream::derive(cfg.seed, {ctx.point_index, trial, kStreamNoise, 0, 0});

    // Per-frame fading draws one realization for all slots; per-symbol fading
    // consumes the per-user streams slot by slot atop a slot-mixed trial tag.
    channel::ChannelRealization frame_ch;
    if (per_frame) frame_ch = draw_channels(ctx, trial);

    std::vector<std::vector<int>> slot_symbols(cfg.groups.size());
    for (std::size_t k = 0; k < cfg.groups.size(); ++k)
        slot_symbols[k].resize(static_cast<std::size_t>(cfg.groups[k].users));

    for (int t = 0; t < slots; ++t) {
        for (std::size_t k = 0; k < cfg.groups.size(); ++k)
            for (int j = 0; j < cfg.groups[k].users; ++j)
                slot_symbols[k][static_cast<std::size_t>(j)] =
                    frames[k][static_cast<std::size_t>(j)].symbols[static_cast<std::size_t>(t)];

        const channel::ChannelRealization ch =
            per_frame ? frame_ch
                      : draw_channels(ctx, trial * static_cast<std::uint64_t>(slots) +
                                               static_cast<std::uint64_t>(t));

        auto received = superpose(slot_symbols, groups, ch);
        received = channel::add_awgn(std::move(received), ctx.noise_power, noise);

        const auto posteriors = detect(ctx, groups, ch, received);
        for (std::size_t k = 0; k < cfg.groups.size(); ++k)
            for (int j = 0; j < cfg.groups[k].users; ++j) {
                const auto llrs =
                    scma::posterior_to_bit_llrs(posteriors[k][static_cast<std::size_t>(j)], ctx.mapping);
                auto& sink = frames[k][static_cast<std::size_t>(j)].llrs;
                sink.insert(sink.end(), llrs.begin(), llrs.end());
            }
    }

    for (std::size_t k = 0; k < cfg.groups.size(); ++k) {
        auto& stats = tally.groups[k];
        for (int j = 0; j < cfg.groups[k].users; ++j) {
            UserFrame& f = frames[k][static_cast<std::size_t>(j)];
            const auto decoded = polar::scl_decode(f.llrs, code);

            stats.frames.total += 1;
            stats.frames.errors += decoded.message != f.message;

            stats.bits.total += code.message_bits;
            for (int b = 0; b < code.message_bits; ++b)
                stats.bits.errors += decoded.message[static_cast<std::size_t>(b)] !=
                                     f.message[static_cast<std::size_t>(b)];

            // Symbol errors compare the re-encoded decision against what was
            // actually transmitted, keeping the metric commensurate with the
            // uncoded modes.
            const auto resymbols =
                polar::frame_to_symbols(polar::encode_frame(decoded.message, code), m);
            stats.symbols.total += slots;
            for (int t = 0; t < slots; ++t)
                stats.symbols.errors += resymbols[static_cast<std::size_t>(t)] !=
                                        f.symbols[static_cast<std::size_t>(t)];
        }
    }
}

int resolve_workers(int workers, long trials) {
    if (workers < 1) {
        const unsigned hw = std::thread::hardware_concurrency();
        workers = hw ? static_cast<int>(hw) : 1;
    }
    if (static_cast<long>(workers) > trials) workers = static_cast<int>(trials);
    return std::max(workers, 1);
}

PointContext make_context(const ScenarioConfig& config, std::size_t point_index,
                          const polar::PolarCodeSpec* code) {
    PointContext ctx;
    ctx.config = &config;
    ctx.point_index = point_index;
    ctx.snr_linear = std::pow(10.0, config.snr_db[point_index] / 10.0);
    // Coded grids are normalised per message bit: a coded system spends
    // n/(k log2 M) symbols per message bit, so its received Es/N0 is scaled by
    // k/n to keep points energy-comparable with the uncoded curves.
    if (code)
        ctx.snr_linear *=
            static_cast<double>(code->message_bits) / code->block_length;

    ctx.powers.resize(config.groups.size(), 1.0);
    if (config.hybrid()) {
        const PowerSplit split = split_power(config.power_ratio_db);
        ctx.powers[0] = split.far;
        ctx.powers[1] = split.near;
    }
    const double near_power = ctx.powers.back();
    ctx.noise_power = near_power * config.gain_variance / ctx.snr_linear;

    const auto graph_cache = [&](int users) {
        return scma::build_factor_graph(users, config.resources, config.user_degree);
    };
    for (const GroupSpec& g : config.groups)
        ctx.codebooks.push_back(std::make_shared<const scma::Codebook>(
            scma::generate_codebook(graph_cache(g.users), config.modulation_order)));

    ctx.code = code;
    ctx.mapping = scma::BitMapping::natural(config.modulation_order);
    return ctx;
}

PointResult run_point_impl(const ScenarioConfig& config, std::size_t point_index, int workers,
                           const polar::PolarCodeSpec* code) {
    const PointContext ctx = make_context(config, point_index, code);
    const long trials = config.trials;
    const int n_workers = resolve_workers(workers, trials);

    std::vector<PointTally> partial(static_cast<std::size_t>(n_workers),
                                    PointTally(config.groups.size()));
    const long chunk = (trials + n_workers - 1) / n_workers;

    auto work = [&](int w) {
        const long begin = static_cast<long>(w) * chunk;
        const long end = std::min(trials, begin + chunk);
        PointTally& tally = partial[static_cast<std::size_t>(w)];
        for (long t = begin; t < end; ++t) {
            if (config.coded())
                run_coded_trial(ctx, static_cast<std::uint64_t>(t), tally);
            else
                run_uncoded_trial(ctx, static_cast<std::uint64_t>(t), tally);
        }
    };

    if (n_workers == 1) {
        work(0);
    } else {
        std::vector<std::thread> threads;
        threads.reserve(static_cast<std::size_t>(n_workers));
        for (int w = 0; w < n_workers; ++w) threads.emplace_back(work, w);
        for (std::thread& th : threads) th.join();
    }

    PointTally total(config.groups.size());
    for (const PointTally& p : partial) total.merge(p);

    PointResult result;
    result.snr_db = config.snr_db[point_index];
    result.groups = std::move(total.groups);
    return result;
}

polar::PolarCodeSpec make_code(const ScenarioConfig& config) {
    auto spec = polar::construct_monte_carlo(config.polar.block_length, config.polar.info_count(),
                                             config.polar.design_snr_db,
                                             config.polar.construction_trials,
                                             config.polar.construction_seed);
    spec.list_size = config.polar.list_size;
    return spec;
}

} // namespace

PointResult run_point(const ScenarioConfig& config, double snr_db, int workers) {
    config.validate();
    const auto it = std::find(config.snr_db.begin(), config.snr_db.end(), snr_db);
    if (it == config.snr_db.end())
        throw ConfigError("snr_db value is not a member of the scenario grid");
    const auto index = static_cast<std::size_t>(it - config.snr_db.begin());

    if (!config.coded()) return run_point_impl(config, index, workers, nullptr);
    const polar::PolarCodeSpec code = make_code(config);
    return run_point_impl(config, index, workers, &code);
}

SimResult run_scenario(const ScenarioConfig& config, int workers, const PointCallback& on_point) {
    config.validate();
    const auto start = std::chrono::steady_clock::now();

    polar::PolarCodeSpec code;
    const bool coded = config.coded();
    if (coded) code = make_code(config);

    SimResult result;
    result.config = config;
    result.scenario_id = config.scenario_id();
    for (std::size_t i = 0; i < config.snr_db.size(); ++i) {
        result.points.push_back(run_point_impl(config, i, workers, coded ? &code : nullptr));
        if (on_point) on_point(result.points.back());
    }

    result.duration_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return result;
}

std::vector<Record> summarize(const SimResult& result) {
    std::vector<Record> records;
    const bool coded = result.config.coded();
    for (const PointResult& point : result.points) {
        for (std::size_t k = 0; k < point.groups.size(); ++k) {
            const GroupPointStats& g = point.groups[k];
            auto push = [&](const char* metric, const MetricCount& c) {
                Record r;
                r.scenario_id = result.scenario_id;
                r.snr_db = point.snr_db;
                r.group = static_cast<int>(k) + 1;
                r.metric = metric;
                r.value = c.rate();
                r.trials = c.total;
                r.errors = c.errors;
                r.ci95 = c.ci95();
                records.push_back(std::move(r));
            };
            // Metric names ascending: ber, fer, ser.
            push("ber", g.bits);
            if (coded) push("fer", g.frames);
            push("ser", g.symbols);
        }
    }
    return records;
}

} // namespace hnoma::sim
