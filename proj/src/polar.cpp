#include "hnoma/polar.hpp"

#include "hnoma/errors.hpp"
#include "hnoma/rng.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

namespace hnoma::polar {
namespace {

bool is_pow2(int v) { return v > 0 && (v & (v - 1)) == 0; }

int log2_exact(int v) {
    int m = 0;
    while ((1 << m) < v) ++m;
    return m;
}

// Check-node LLR combination f(a,b) = 2 atanh(tanh(a/2) tanh(b/2)), evaluated
// as sign(a)sign(b) * (min + log1p(e^-(|a|+|b|)) - log1p(e^-||a|-|b||)) which
// is stable for every magnitude.
double llr_check(double a, double b) {
    const double am = std::abs(a);
    const double bm = std::abs(b);
    const double mn = std::min(am, bm);
    const double mx = std::max(am, bm);
    const double mag = mn + std::log1p(std::exp(-(am + bm))) - std::log1p(std::exp(-(mx - mn)));
    return ((a < 0.0) != (b < 0.0)) ? -mag : mag;
}

double llr_extend(double a, double b, std::uint8_t bit) { return bit ? b - a : b + a; }

// Penalty of deciding `bit` when the LLR points the other way.
double metric_penalty(double llr, std::uint8_t bit) {
    const std::uint8_t favoured = llr < 0.0 ? 1 : 0;
    return bit == favoured ? 0.0 : std::abs(llr);
}

// Transforms channel LLRs of the all-zero codeword into the n successive-
// cancellation decision LLRs, assuming every earlier decision was correct
// (all partial sums zero).  Operates in place.
void zero_genie_llrs(std::span<double> v) {
    const std::size_t n = v.size();
    if (n == 1) return;
    const std::size_t h = n / 2;
    for (std::size_t j = 0; j < h; ++j) {
        const double a = v[j];
        const double b = v[j + h];
        v[j] = llr_check(a, b);
        v[j + h] = a + b;
    }
    zero_genie_llrs(v.first(h));
    zero_genie_llrs(v.subspan(h));
}

std::uint64_t crc_register(std::span<const std::uint8_t> bits, const CrcSpec& spec) {
    const std::uint64_t taps = spec.polynomial & ((1ULL << spec.bits) - 1);
    const std::uint64_t top = 1ULL << (spec.bits - 1);
    const std::uint64_t mask = (1ULL << spec.bits) - 1;
    std::uint64_t reg = spec.initial;
    for (std::uint8_t bit : bits) {
        const std::uint64_t feedback = ((reg & top) ? 1u : 0u) ^ (bit & 1u);
        reg = (reg << 1) & mask;
        if (feedback) reg ^= taps;
    }
    return reg;
}

} // namespace

CrcSpec CrcSpec::ccitt16() {
    CrcSpec spec;
    spec.bits = 16;
    spec.polynomial = 0x11021; // x^16 + x^12 + x^5 + 1
    spec.initial = 0;
    return spec;
}

void CrcSpec::validate() const {
    if (bits < 1 || bits > 63) throw ConfigError("crc length must lie in [1, 63]");
    if ((polynomial >> bits) != 1ULL)
        throw ConfigError("crc polynomial degree must equal the checksum length");
    if ((polynomial & 1ULL) == 0)
        throw ConfigError("crc polynomial must have a nonzero constant term");
    if (initial >> bits)
        throw ConfigError("crc initial register wider than the checksum");
}

std::vector<std::uint8_t> crc_encode(std::span<const std::uint8_t> message, const CrcSpec& spec) {
    spec.validate();
    std::vector<std::uint8_t> frame(message.begin(), message.end());
    const std::uint64_t reg = crc_register(message, spec);
    for (int b = spec.bits - 1; b >= 0; --b)
        frame.push_back(static_cast<std::uint8_t>((reg >> b) & 1u));
    return frame;
}

bool crc_check(std::span<const std::uint8_t> frame, const CrcSpec& spec) {
    spec.validate();
    if (std::ssize(frame) < spec.bits) return false;
    return crc_register(frame, spec) == 0;
}

void PolarCodeSpec::validate() const {
    crc.validate();
    if (!is_pow2(block_length)) throw ConfigError("block length must be a power of two");
    if (message_bits < 1) throw ConfigError("polar code needs at least one message bit");
    if (list_size < 1) throw ConfigError("list size must be >= 1");
    if (info_count() > block_length)
        throw ConfigError("info bits plus crc exceed the block length");
    if (std::ssize(info_set) != info_count())
        throw ConfigError("info set size must equal message bits plus crc bits");
    if (std::ssize(frozen_set) != block_length - info_count())
        throw ConfigError("frozen set size must equal block length minus info count");

    std::vector<std::uint8_t> seen(static_cast<std::size_t>(block_length), 0);
    auto mark = [&](const std::vector<int>& set) {
        int prev = -1;
        for (int idx : set) {
            if (idx < 0 || idx >= block_length) throw ConfigError("code index out of range");
            if (idx <= prev) throw ConfigError("code index sets must be strictly ascending");
            if (seen[static_cast<std::size_t>(idx)]++) throw ConfigError("info and frozen sets overlap");
            prev = idx;
        }
    };
    mark(info_set);
    mark(frozen_set);
}

PolarCodeSpec construct_monte_carlo(int block_length,
                                    int info_count,
                                    double design_snr_db,
                                    long trials,
                                    std::uint64_t seed,
                                    const CrcSpec& crc,
                                    int list_size) {
    crc.validate();
    if (!is_pow2(block_length) || block_length < 2)
        throw ConfigError("block length must be a power of two >= 2");
    if (info_count <= crc.bits || info_count > block_length)
        throw ConfigError("info count must exceed the crc length and fit the block");
    if (trials < 1000)
        throw ConfigError("construction needs at least 1000 trials");

    const std::size_t n = static_cast<std::size_t>(block_length);
    const double snr = std::pow(10.0, design_snr_db / 10.0);
    const double noise_var = 1.0 / (2.0 * snr); // unit-energy BPSK, Es/N0 convention
    const double sigma = std::sqrt(noise_var);
    const double llr_scale = 2.0 / noise_var;

    std::vector<long> errors(n, 0);
    std::vector<double> llrs(n);
    for (long t = 0; t < trials; ++t) {
        auto rng = RandomStream::derive(seed, {static_cast<std::uint64_t>(t)});
        for (std::size_t i = 0; i < n; ++i)
            llrs[i] = llr_scale * (1.0 + sigma * rng.next_gaussian());
        zero_genie_llrs(llrs);
        for (std::size_t i = 0; i < n; ++i)
            if (!(llrs[i] > 0.0)) ++errors[i];
    }

    // Most reliable info_count indices win; equal counts prefer the higher
    // index, which polarises better.
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        const long ea = errors[static_cast<std::size_t>(a)];
        const long eb = errors[static_cast<std::size_t>(b)];
        if (ea != eb) return ea < eb;
        return a > b;
    });

    PolarCodeSpec spec;
    spec.block_length = block_length;
    spec.message_bits = info_count - crc.bits;
    spec.crc = crc;
    spec.list_size = list_size;
    spec.info_set.assign(order.begin(), order.begin() + info_count);
    spec.frozen_set.assign(order.begin() + info_count, order.end());
    std::sort(spec.info_set.begin(), spec.info_set.end());
    std::sort(spec.frozen_set.begin(), spec.frozen_set.end());
    spec.construction = "monte-carlo";
    spec.design_snr_db = design_snr_db;
    spec.construction_trials = trials;
    spec.construction_seed = seed;
    spec.validate();
    return spec;
}

std::vector<std::uint8_t> polar_encode(std::span<const std::uint8_t> info_bits,
                                       const PolarCodeSpec& spec) {
    spec.validate();
    if (std::ssize(info_bits) != spec.info_count())
        throw InputError("polar_encode expects message plus crc bits");

    std::vector<std::uint8_t> x(static_cast<std::size_t>(spec.block_length), 0);
    for (std::size_t i = 0; i < info_bits.size(); ++i)
        x[static_cast<std::size_t>(spec.info_set[i])] = info_bits[i] & 1u;

    const int n = spec.block_length;
    for (int h = 1; h < n; h *= 2)
        for (int base = 0; base < n; base += 2 * h)
            for (int j = 0; j < h; ++j)
                x[static_cast<std::size_t>(base + j)] ^= x[static_cast<std::size_t>(base + j + h)];
    return x;
}

std::vector<std::uint8_t> encode_frame(std::span<const std::uint8_t> message,
                                       const PolarCodeSpec& spec) {
    if (std::ssize(message) != spec.message_bits)
        throw InputError("encode_frame expects exactly message_bits bits");
    return polar_encode(crc_encode(message, spec.crc), spec);
}

namespace {

// Successive-cancellation list decoding with per-path memoised LLR and
// partial-sum arrays, as in the Tal-Vardy formulation but with natural-order
// pairing: level lam combines positions (b, b + n>>lam) of level lam-1.
class ListDecoder {
public:
    ListDecoder(std::span<const double> channel_llrs, const PolarCodeSpec& spec)
        : spec_(spec), n_(spec.block_length), stages_(log2_exact(spec.block_length)),
          channel_(channel_llrs.begin(), channel_llrs.end()) {
        frozen_.assign(static_cast<std::size_t>(n_), 1);
        for (int idx : spec_.info_set) frozen_[static_cast<std::size_t>(idx)] = 0;
    }

    DecodeResult run() {
        paths_.clear();
        paths_.push_back(make_path());

        for (int phase = 0; phase < n_; ++phase) {
            for (Path& p : paths_) compute_llr(p, stages_, phase);

            if (frozen_[static_cast<std::size_t>(phase)]) {
                for (Path& p : paths_) {
                    const double llr = p.llr[static_cast<std::size_t>(stages_)][0];
                    apply_decision(p, phase, 0, p.metric + metric_penalty(llr, 0));
                }
            } else {
                fork(phase);
            }
            if (phase % 2 == 1)
                for (Path& p : paths_) propagate_sums(p, stages_, phase);
        }
        return select();
    }

private:
    struct Path {
        // llr[lam] has n >> lam entries; level 0 is the shared channel array
        // held by the decoder, so the per-path slot stays empty.
        std::vector<std::vector<double>> llr;
        // bits[lam] has 2*(n >> lam) entries: slots for the even and odd
        // phase of every position, interleaved as [2*b + parity].
        std::vector<std::vector<std::uint8_t>> bits;
        std::vector<std::uint8_t> decisions;
        double metric = 0.0;
        std::uint64_t birth = 0;
    };

    Path make_path() {
        Path p;
        p.llr.resize(static_cast<std::size_t>(stages_) + 1);
        p.bits.resize(static_cast<std::size_t>(stages_) + 1);
        for (int lam = 1; lam <= stages_; ++lam) {
            p.llr[static_cast<std::size_t>(lam)].assign(static_cast<std::size_t>(n_ >> lam), 0.0);
            p.bits[static_cast<std::size_t>(lam)].assign(static_cast<std::size_t>(2 * (n_ >> lam)), 0);
        }
        p.decisions.assign(static_cast<std::size_t>(n_), 0);
        p.birth = next_birth_++;
        return p;
    }

    // Fills p.llr[lam] for the given phase of that level.
    void compute_llr(Path& p, int lam, int phase) {
        if (lam == 0) return;
        if (phase % 2 == 0) compute_llr(p, lam - 1, phase / 2);
        const int len = n_ >> lam;
        const std::vector<double>& src = lam == 1 ? channel_ : p.llr[static_cast<std::size_t>(lam - 1)];
        auto& dst = p.llr[static_cast<std::size_t>(lam)];
        const auto& own_bits = p.bits[static_cast<std::size_t>(lam)];
        for (int b = 0; b < len; ++b) {
            const double a = src[static_cast<std::size_t>(b)];
            const double c = src[static_cast<std::size_t>(b + len)];
            dst[static_cast<std::size_t>(b)] =
                phase % 2 == 0 ? llr_check(a, c)
                               : llr_extend(a, c, own_bits[static_cast<std::size_t>(2 * b)]);
        }
    }

    void apply_decision(Path& p, int phase, std::uint8_t bit, double metric) {
        p.bits[static_cast<std::size_t>(stages_)][static_cast<std::size_t>(phase % 2)] = bit;
        p.decisions[static_cast<std::size_t>(phase)] = bit;
        p.metric = metric;
    }

    // Pushes the finished (even, odd) pair of level lam at odd `phase` down to
    // level lam-1, mirroring the encoder: left half takes the XOR, right half
    // the odd bit.  Level-0 sums are the decoded codeword and never read, so
    // propagation stops above them.
    void propagate_sums(Path& p, int lam, int phase) {
        if (lam == 1) return;
        const int len = n_ >> lam;
        const int parent_phase = phase / 2;
        auto& cur = p.bits[static_cast<std::size_t>(lam)];
        auto& par = p.bits[static_cast<std::size_t>(lam - 1)];
        const int parity = parent_phase % 2;
        for (int b = 0; b < len; ++b) {
            const std::uint8_t even = cur[static_cast<std::size_t>(2 * b)];
            const std::uint8_t odd = cur[static_cast<std::size_t>(2 * b + 1)];
            par[static_cast<std::size_t>(2 * b + parity)] = even ^ odd;
            par[static_cast<std::size_t>(2 * (b + len) + parity)] = odd;
        }
        if (parent_phase % 2 == 1) propagate_sums(p, lam - 1, parent_phase);
    }

    // Expands every path by both bit values and keeps the list_size best
    // forks ordered by (metric, parent creation order, bit value).
    void fork(int phase) {
        struct Candidate {
            std::size_t path;
            std::uint8_t bit;
            double metric;
            std::uint64_t birth;
        };
        std::vector<Candidate> cands;
        cands.reserve(paths_.size() * 2);
        for (std::size_t i = 0; i < paths_.size(); ++i) {
            const double llr = paths_[i].llr[static_cast<std::size_t>(stages_)][0];
            for (std::uint8_t bit = 0; bit < 2; ++bit)
                cands.push_back({i, bit, paths_[i].metric + metric_penalty(llr, bit),
                                 paths_[i].birth});
        }
        std::sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
            if (a.metric != b.metric) return a.metric < b.metric;
            if (a.birth != b.birth) return a.birth < b.birth;
            return a.bit < b.bit;
        });
        if (std::ssize(cands) > spec_.list_size)
            cands.resize(static_cast<std::size_t>(spec_.list_size));

        // Materialise the survivors.  The first fork of a parent reuses the
        // parent object; a second fork clones its sibling (their state only
        // differs in the decision just applied, which is rewritten).
        std::vector<Path> next;
        next.reserve(cands.size());
        std::vector<int> first_fork(paths_.size(), -1);
        for (const Candidate& c : cands) {
            if (first_fork[c.path] < 0) {
                first_fork[c.path] = static_cast<int>(next.size());
                next.push_back(std::move(paths_[c.path]));
                apply_decision(next.back(), phase, c.bit, c.metric);
            } else {
                Path clone = next[static_cast<std::size_t>(first_fork[c.path])];
                apply_decision(clone, phase, c.bit, c.metric);
                clone.birth = next_birth_++;
                next.push_back(std::move(clone));
            }
        }
        paths_ = std::move(next);
    }

    DecodeResult select() {
        const Path* chosen = nullptr;
        bool chosen_pass = false;
        std::vector<std::uint8_t> info(static_cast<std::size_t>(spec_.info_count()));
        for (const Path& p : paths_) {
            for (std::size_t i = 0; i < info.size(); ++i)
                info[i] = p.decisions[static_cast<std::size_t>(spec_.info_set[i])];
            const bool pass = crc_check(info, spec_.crc);
            const bool better =
                chosen == nullptr || (pass && !chosen_pass) ||
                (pass == chosen_pass &&
                 (p.metric < chosen->metric ||
                  (p.metric == chosen->metric && p.birth < chosen->birth)));
            if (better) {
                chosen = &p;
                chosen_pass = pass;
            }
        }

        DecodeResult result;
        result.crc_pass = chosen_pass;
        result.path_metric = chosen->metric;
        result.decisions = chosen->decisions;
        result.message.resize(static_cast<std::size_t>(spec_.message_bits));
        for (int i = 0; i < spec_.message_bits; ++i)
            result.message[static_cast<std::size_t>(i)] =
                chosen->decisions[static_cast<std::size_t>(spec_.info_set[static_cast<std::size_t>(i)])];
        return result;
    }

    const PolarCodeSpec& spec_;
    int n_;
    int stages_;
    std::vector<double> channel_;
    std::vector<std::uint8_t> frozen_;
    std::vector<Path> paths_;
    std::uint64_t next_birth_ = 0;
};

} // namespace

DecodeResult scl_decode(std::span<const double> channel_llrs, const PolarCodeSpec& spec) {
    spec.validate();
    if (std::ssize(channel_llrs) != spec.block_length)
        throw InputError("channel llr length must equal the block length");
    for (double l : channel_llrs)
        if (!std::isfinite(l)) throw InputError("channel llrs must be finite");

    return ListDecoder(channel_llrs, spec).run();
}

std::vector<int> frame_to_symbols(std::span<const std::uint8_t> frame, int bits_per_symbol) {
    if (bits_per_symbol < 1) throw ConfigError("bits per symbol must be >= 1");
    if (frame.size() % static_cast<std::size_t>(bits_per_symbol) != 0)
        throw InputError("frame length must be a multiple of bits per symbol");
    std::vector<int> symbols(frame.size() / static_cast<std::size_t>(bits_per_symbol));
    for (std::size_t t = 0; t < symbols.size(); ++t) {
        int s = 0;
        for (int b = 0; b < bits_per_symbol; ++b)
            s = (s << 1) | (frame[t * static_cast<std::size_t>(bits_per_symbol) +
                                  static_cast<std::size_t>(b)] & 1);
        symbols[t] = s;
    }
    return symbols;
}

std::vector<std::uint8_t> symbols_to_frame(std::span<const int> symbols, int bits_per_symbol) {
    if (bits_per_symbol < 1) throw ConfigError("bits per symbol must be >= 1");
    std::vector<std::uint8_t> frame(symbols.size() * static_cast<std::size_t>(bits_per_symbol));
    for (std::size_t t = 0; t < symbols.size(); ++t) {
        const int s = symbols[t];
        if (s < 0 || s >= (1 << bits_per_symbol)) throw InputError("symbol out of range");
        for (int b = 0; b < bits_per_symbol; ++b)
            frame[t * static_cast<std::size_t>(bits_per_symbol) + static_cast<std::size_t>(b)] =
                static_cast<std::uint8_t>((s >> (bits_per_symbol - 1 - b)) & 1);
    }
    return frame;
}

void save_frozen_set(const std::filesystem::path& path, const PolarCodeSpec& spec) {
    spec.validate();
    std::ofstream out(path);
    if (!out) throw InputError("cannot open frozen-set file for writing: " + path.string());
    out << "n=" << spec.block_length << '\n';
    for (int idx : spec.frozen_set) out << idx << '\n';
    if (!out) throw InputError("failed writing frozen-set file: " + path.string());
}

PolarCodeSpec load_frozen_set(const std::filesystem::path& path, const CrcSpec& crc, int list_size) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open frozen-set file: " + path.string());

    std::string header;
    if (!std::getline(in, header) || header.rfind("n=", 0) != 0)
        throw InputError("frozen-set file must start with an n=<block length> header");
    int n = 0;
    try {
        std::size_t used = 0;
        n = std::stoi(header.substr(2), &used);
        if (used != header.size() - 2) throw std::invalid_argument("trailing characters");
    } catch (const std::exception&) {
        throw InputError("malformed block length in frozen-set header");
    }
    if (!is_pow2(n)) throw InputError("frozen-set block length must be a power of two");

    std::vector<int> frozen;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        int idx = 0;
        try {
            std::size_t used = 0;
            idx = std::stoi(line, &used);
            if (used != line.size()) throw std::invalid_argument("trailing characters");
        } catch (const std::exception&) {
            throw InputError("malformed index in frozen-set file: '" + line + "'");
        }
        if (idx < 0 || idx >= n) throw InputError("frozen index out of range");
        if (!frozen.empty() && idx <= frozen.back())
            throw InputError("frozen indices must be strictly ascending");
        frozen.push_back(idx);
    }

    PolarCodeSpec spec;
    spec.block_length = n;
    spec.crc = crc;
    spec.list_size = list_size;
    spec.frozen_set = frozen;
    spec.message_bits = n - static_cast<int>(frozen.size()) - crc.bits;
    if (spec.message_bits < 1)
        throw InputError("frozen set leaves no room for message bits");
    std::vector<std::uint8_t> is_frozen(static_cast<std::size_t>(n), 0);
    for (int idx : frozen) is_frozen[static_cast<std::size_t>(idx)] = 1;
    for (int i = 0; i < n; ++i)
        if (!is_frozen[static_cast<std::size_t>(i)]) spec.info_set.push_back(i);
    spec.construction = "imported";
    spec.validate();
    return spec;
}

} // namespace hnoma::polar
