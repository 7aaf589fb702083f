#include "hnoma/scma.hpp"

#include "hnoma/errors.hpp"
#include "hnoma/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace hnoma::scma {
namespace {

bool is_pow2(int v) { return v > 0 && (v & (v - 1)) == 0; }

// Enumerates all d-element subsets of {0..z-1} in lexicographic order.
std::vector<std::vector<int>> lexicographic_subsets(int z, int d) {
    std::vector<std::vector<int>> out;
    std::vector<int> cur(static_cast<std::size_t>(d));
    for (int i = 0; i < d; ++i) cur[static_cast<std::size_t>(i)] = i;
    while (true) {
        out.push_back(cur);
        // Advance to the next subset in lexicographic order.
        int i = d - 1;
        while (i >= 0 && cur[static_cast<std::size_t>(i)] == z - d + i) --i;
        if (i < 0) break;
        ++cur[static_cast<std::size_t>(i)];
        for (int j = i + 1; j < d; ++j)
            cur[static_cast<std::size_t>(j)] = cur[static_cast<std::size_t>(j - 1)] + 1;
    }
    return out;
}

void check_finite(std::span<const cplx> values, const char* what) {
    for (const cplx& v : values) {
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
            throw InputError(std::string(what) + " contains a non-finite value");
    }
}

constexpr double kMessageFloor = 1e-300;

void normalise(std::vector<double>& v) {
    double sum = 0.0;
    for (double& x : v) {
        if (x < kMessageFloor) x = kMessageFloor;
        sum += x;
    }
    for (double& x : v) x /= sum;
}

} // namespace

FactorGraph build_factor_graph(int users, int resources, int user_degree) {
    if (users < 1 || resources < 1)
        throw ConfigError("factor graph needs at least one user and one resource");
    if (user_degree < 1 || user_degree > resources)
        throw ConfigError("user degree must lie in [1, resources]");
    if ((users * user_degree) % resources != 0)
        throw ConfigError("resources must divide users*user_degree for a balanced graph");

    const auto patterns = lexicographic_subsets(resources, user_degree);

    FactorGraph g;
    g.resources = resources;
    g.users = users;
    g.user_degree = user_degree;
    g.incidence.assign(static_cast<std::size_t>(resources),
                       std::vector<std::uint8_t>(static_cast<std::size_t>(users), 0));
    g.resource_users.resize(static_cast<std::size_t>(resources));
    g.user_resources.resize(static_cast<std::size_t>(users));

    for (int j = 0; j < users; ++j) {
        const auto& pat = patterns[static_cast<std::size_t>(j) % patterns.size()];
        g.user_resources[static_cast<std::size_t>(j)] = pat;
        for (int z : pat) {
            g.incidence[static_cast<std::size_t>(z)][static_cast<std::size_t>(j)] = 1;
            g.resource_users[static_cast<std::size_t>(z)].push_back(j);
        }
    }
    return g;
}

int Codebook::bits_per_symbol() const {
    int m = 0;
    while ((1 << (m + 1)) <= order) ++m;
    return m;
}

Codebook generate_codebook(const FactorGraph& graph, int order, std::uint64_t rotation_seed) {
    if (!is_pow2(order) || order < 2)
        throw ConfigError("modulation order must be a power of two >= 2");
    if (graph.users < 1 || graph.user_degree < 1)
        throw ConfigError("codebook requires a populated factor graph");

    Codebook cb;
    cb.graph = graph;
    cb.order = order;
    cb.rotation_seed = rotation_seed;

    const int J = graph.users;
    const int Z = graph.resources;
    const int dv = graph.user_degree;
    const double entry_scale = 1.0 / std::sqrt(static_cast<double>(dv));

    cb.codewords.assign(static_cast<std::size_t>(J),
                        std::vector<std::vector<cplx>>(
                            static_cast<std::size_t>(order),
                            std::vector<cplx>(static_cast<std::size_t>(Z), cplx{0.0, 0.0})));

    for (int j = 0; j < J; ++j) {
        const auto& occupied = graph.user_resources[static_cast<std::size_t>(j)];
        // Phase plan: entry d (d-th occupied resource z) of user j rotates the
        // mother constellation by 2*pi*(j*d + z)/(J*d_v); an optional seeded
        // offset decorrelates codebooks generated for different seeds.
        std::vector<double> rotation(occupied.size());
        for (std::size_t d = 0; d < occupied.size(); ++d) {
            const int z = occupied[d];
            double theta = 2.0 * std::numbers::pi *
                           (static_cast<double>(j) * static_cast<double>(d) + z) /
                           (static_cast<double>(J) * dv);
            if (rotation_seed != 0) {
                auto rs = RandomStream::derive(rotation_seed,
                                               {static_cast<std::uint64_t>(j), d});
                theta += 2.0 * std::numbers::pi * rs.next_unit();
            }
            rotation[d] = theta;
        }

        double energy = 0.0;
        for (int s = 0; s < order; ++s) {
            const double sym_angle = 2.0 * std::numbers::pi * s / order;
            auto& word = cb.codewords[static_cast<std::size_t>(j)][static_cast<std::size_t>(s)];
            for (std::size_t d = 0; d < occupied.size(); ++d) {
                const cplx value = std::polar(entry_scale, sym_angle + rotation[d]);
                word[static_cast<std::size_t>(occupied[d])] = value;
                energy += std::norm(value);
            }
        }
        // Renormalise so the average codeword energy per user is exactly one.
        const double scale = std::sqrt(static_cast<double>(order) / energy);
        for (auto& word : cb.codewords[static_cast<std::size_t>(j)])
            for (cplx& v : word) v *= scale;
    }
    return cb;
}

std::vector<cplx> scma_encode(const Codebook& cb, std::span<const int> symbols) {
    if (std::ssize(symbols) != cb.users())
        throw InputError("scma_encode expects one symbol per user");
    std::vector<cplx> y(static_cast<std::size_t>(cb.resources()), cplx{0.0, 0.0});
    for (int j = 0; j < cb.users(); ++j) {
        const int s = symbols[static_cast<std::size_t>(j)];
        if (s < 0 || s >= cb.order) throw InputError("symbol index out of range");
        const auto& word = cb.codeword(j, s);
        for (int z = 0; z < cb.resources(); ++z)
            y[static_cast<std::size_t>(z)] += word[static_cast<std::size_t>(z)];
    }
    return y;
}

std::vector<SymbolPosterior> mpa_detect(std::span<const cplx> received,
                                        std::span<const cplx> gains,
                                        const Codebook& cb,
                                        std::span<const double> noise_var,
                                        int iterations) {
    const int Z = cb.resources();
    const int J = cb.users();
    const int M = cb.order;

    if (std::ssize(received) != Z) throw InputError("received vector length must equal resources");
    if (std::ssize(gains) != J) throw InputError("gain vector length must equal users");
    if (std::ssize(noise_var) != Z) throw InputError("noise variance length must equal resources");
    if (iterations < 1) throw ConfigError("mpa_detect needs at least one iteration");
    for (double nv : noise_var) {
        if (!(nv > 0.0) || !std::isfinite(nv))
            throw ConfigError("noise variances must be positive and finite");
    }
    check_finite(received, "received vector");
    check_finite(gains, "gain vector");

    const auto& graph = cb.graph;

    // Per resource: gain-scaled codeword entries for every (user position,
    // symbol), then the Gaussian likelihood of every joint symbol combination
    // of the users sharing the resource.  The likelihoods are rescaled by the
    // per-resource maximum so the tables stay in floating-point range; the
    // common factor cancels in the message normalisation.
    struct ResourceTable {
        std::vector<int> users;           // users on this resource
        std::vector<cplx> contrib;        // [position * M + symbol]
        std::vector<double> weight;       // [combo], M^degree entries
    };
    std::vector<ResourceTable> tables(static_cast<std::size_t>(Z));

    for (int z = 0; z < Z; ++z) {
        auto& t = tables[static_cast<std::size_t>(z)];
        t.users = graph.resource_users[static_cast<std::size_t>(z)];
        const int deg = static_cast<int>(t.users.size());
        t.contrib.resize(static_cast<std::size_t>(deg) * M);
        for (int p = 0; p < deg; ++p)
            for (int s = 0; s < M; ++s)
                t.contrib[static_cast<std::size_t>(p) * M + s] =
                    gains[static_cast<std::size_t>(t.users[static_cast<std::size_t>(p)])] *
                    cb.codeword(t.users[static_cast<std::size_t>(p)], s)[static_cast<std::size_t>(z)];

        std::size_t combos = 1;
        for (int p = 0; p < deg; ++p) combos *= static_cast<std::size_t>(M);
        std::vector<double> expo(combos);
        double max_expo = -std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < combos; ++c) {
            cplx sum{0.0, 0.0};
            std::size_t rest = c;
            for (int p = 0; p < deg; ++p) {
                sum += t.contrib[static_cast<std::size_t>(p) * M + (rest % M)];
                rest /= static_cast<std::size_t>(M);
            }
            const double e = -std::norm(received[static_cast<std::size_t>(z)] - sum) /
                             noise_var[static_cast<std::size_t>(z)];
            expo[c] = e;
            max_expo = std::max(max_expo, e);
        }
        t.weight.resize(combos);
        for (std::size_t c = 0; c < combos; ++c) t.weight[c] = std::exp(expo[c] - max_expo);
    }

    // Messages are indexed by (resource, position of user on that resource).
    // user_edge[j] lists (resource, position) pairs for user j.
    struct Edge {
        int resource;
        int position;
    };
    std::vector<std::vector<Edge>> user_edges(static_cast<std::size_t>(J));
    for (int z = 0; z < Z; ++z) {
        const auto& t = tables[static_cast<std::size_t>(z)];
        for (int p = 0; p < static_cast<int>(t.users.size()); ++p)
            user_edges[static_cast<std::size_t>(t.users[static_cast<std::size_t>(p)])].push_back(
                {z, p});
    }

    const double uniform = 1.0 / M;
    std::vector<std::vector<std::vector<double>>> to_user(static_cast<std::size_t>(Z));
    std::vector<std::vector<std::vector<double>>> to_resource(static_cast<std::size_t>(Z));
    for (int z = 0; z < Z; ++z) {
        const std::size_t deg = tables[static_cast<std::size_t>(z)].users.size();
        to_user[static_cast<std::size_t>(z)].assign(deg, std::vector<double>(static_cast<std::size_t>(M), uniform));
        to_resource[static_cast<std::size_t>(z)].assign(deg, std::vector<double>(static_cast<std::size_t>(M), uniform));
    }

    std::vector<std::size_t> combo_symbols; // scratch, symbol digit per position
    for (int iter = 0; iter < iterations; ++iter) {
        // Resource update: marginalise the joint likelihood against the
        // incoming user messages.  Each combination contributes its full
        // product once; dividing by the target's own factor yields the
        // product over the other users (factors are floored, so never zero).
        for (int z = 0; z < Z; ++z) {
            auto& t = tables[static_cast<std::size_t>(z)];
            const int deg = static_cast<int>(t.users.size());
            auto& out = to_user[static_cast<std::size_t>(z)];
            const auto& in = to_resource[static_cast<std::size_t>(z)];
            for (int p = 0; p < deg; ++p)
                std::fill(out[static_cast<std::size_t>(p)].begin(), out[static_cast<std::size_t>(p)].end(), 0.0);

            const std::size_t combos = t.weight.size();
            combo_symbols.assign(static_cast<std::size_t>(deg), 0);
            for (std::size_t c = 0; c < combos; ++c) {
                double prod = t.weight[c];
                for (int p = 0; p < deg; ++p)
                    prod *= in[static_cast<std::size_t>(p)][combo_symbols[static_cast<std::size_t>(p)]];
                if (prod != 0.0) {
                    for (int p = 0; p < deg; ++p)
                        out[static_cast<std::size_t>(p)][combo_symbols[static_cast<std::size_t>(p)]] +=
                            prod / in[static_cast<std::size_t>(p)][combo_symbols[static_cast<std::size_t>(p)]];
                }
                // Advance the mixed-radix digit counter.
                for (int p = 0; p < deg; ++p) {
                    if (++combo_symbols[static_cast<std::size_t>(p)] < static_cast<std::size_t>(M)) break;
                    combo_symbols[static_cast<std::size_t>(p)] = 0;
                }
            }
            for (int p = 0; p < deg; ++p) normalise(out[static_cast<std::size_t>(p)]);
        }

        // User update: product of messages from the user's other resources.
        for (int j = 0; j < J; ++j) {
            const auto& edges = user_edges[static_cast<std::size_t>(j)];
            for (const Edge& e : edges) {
                auto& msg = to_resource[static_cast<std::size_t>(e.resource)][static_cast<std::size_t>(e.position)];
                std::fill(msg.begin(), msg.end(), 1.0);
                for (const Edge& o : edges) {
                    if (o.resource == e.resource && o.position == e.position) continue;
                    const auto& incoming = to_user[static_cast<std::size_t>(o.resource)][static_cast<std::size_t>(o.position)];
                    for (int s = 0; s < M; ++s) msg[static_cast<std::size_t>(s)] *= incoming[static_cast<std::size_t>(s)];
                }
                normalise(msg);
            }
        }
    }

    // Posterior: product of all resource messages into the user.
    std::vector<SymbolPosterior> posteriors(static_cast<std::size_t>(J),
                                            SymbolPosterior(static_cast<std::size_t>(M), 1.0));
    for (int j = 0; j < J; ++j) {
        auto& post = posteriors[static_cast<std::size_t>(j)];
        for (const Edge& e : user_edges[static_cast<std::size_t>(j)]) {
            const auto& incoming = to_user[static_cast<std::size_t>(e.resource)][static_cast<std::size_t>(e.position)];
            for (int s = 0; s < M; ++s) post[static_cast<std::size_t>(s)] *= incoming[static_cast<std::size_t>(s)];
        }
        normalise(post);
    }
    return posteriors;
}

BitMapping BitMapping::natural(int order) {
    if (!is_pow2(order) || order < 2)
        throw ConfigError("bit mapping requires a power-of-two order >= 2");
    BitMapping map;
    map.bits = 0;
    while ((1 << map.bits) < order) ++map.bits;
    map.symbol_to_pattern.resize(static_cast<std::size_t>(order));
    for (int s = 0; s < order; ++s) map.symbol_to_pattern[static_cast<std::size_t>(s)] = static_cast<std::uint32_t>(s);
    return map;
}

std::vector<double> posterior_to_bit_llrs(const SymbolPosterior& posterior, const BitMapping& map) {
    const std::size_t order = posterior.size();
    if (order != map.symbol_to_pattern.size())
        throw InputError("posterior size does not match bit mapping");
    double sum = 0.0;
    for (double p : posterior) sum += p;
    if (std::abs(sum - 1.0) > 1e-6)
        throw InternalError("symbol posterior is not normalised");

    constexpr double kClamp = 30.0;
    std::vector<double> llrs(static_cast<std::size_t>(map.bits));
    for (int b = 0; b < map.bits; ++b) {
        double p0 = 0.0;
        double p1 = 0.0;
        for (std::size_t s = 0; s < order; ++s) {
            if (map.bit(static_cast<int>(s), b) == 0)
                p0 += posterior[s];
            else
                p1 += posterior[s];
        }
        double llr;
        if (p0 <= 0.0)
            llr = -kClamp;
        else if (p1 <= 0.0)
            llr = kClamp;
        else
            llr = std::log(p0) - std::log(p1);
        llrs[static_cast<std::size_t>(b)] = std::clamp(llr, -kClamp, kClamp);
    }
    return llrs;
}

int hard_decision(const SymbolPosterior& posterior) {
    if (posterior.empty()) throw InputError("empty posterior");
    int best = 0;
    for (int s = 1; s < static_cast<int>(posterior.size()); ++s)
        if (posterior[static_cast<std::size_t>(s)] > posterior[static_cast<std::size_t>(best)]) best = s;
    return best;
}

} // namespace hnoma::scma
