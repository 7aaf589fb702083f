#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

namespace hnoma::scma {

using cplx = std::complex<double>;

// Sparse resource/user incidence structure of an SCMA system: Z orthogonal
// resources (rows) by J users (columns), every column of weight d_v.
struct FactorGraph {
    int resources = 0;   // Z
    int users = 0;       // J
    int user_degree = 0; // d_v, occupied resources per user

    // incidence[z][j] is 1 when user j occupies resource z.
    std::vector<std::vector<std::uint8_t>> incidence;
    // Per resource: the users occupying it, ascending.
    std::vector<std::vector<int>> resource_users;
    // Per user: the resources it occupies, ascending.
    std::vector<std::vector<int>> user_resources;

    // Average resource degree J*d_v/Z.  Individual rows can deviate by one
    // or two when J is not a multiple of the number of distinct column
    // patterns C(Z, d_v).
    int nominal_resource_degree() const { return users * user_degree / resources; }

    // Overload factor J/Z (1.5 -> 150%).
    double overload_factor() const { return static_cast<double>(users) / resources; }
};

// Builds the incidence structure by enumerating all C(Z, d_v)
// d_v-element subsets of the resources in lexicographic order and assigning
// them to users cyclically.  Requires Z | J*d_v and d_v <= Z.
FactorGraph build_factor_graph(int users, int resources, int user_degree);

// Per-user codebooks: codewords[j][s] is the length-Z complex codeword user j
// transmits for symbol s, nonzero exactly on the user's occupied resources,
// with unit average energy per user.
struct Codebook {
    FactorGraph graph;
    int order = 0; // M, symbols per user
    std::uint64_t rotation_seed = 0;
    std::vector<std::vector<std::vector<cplx>>> codewords;

    int users() const { return graph.users; }
    int resources() const { return graph.resources; }
    int bits_per_symbol() const;

    const std::vector<cplx>& codeword(int user, int symbol) const {
        return codewords[static_cast<std::size_t>(user)][static_cast<std::size_t>(symbol)];
    }
};

// Derives codebooks from an M-point unit-energy PSK ring with deterministic
// per-user, per-resource phase rotations.  A nonzero rotation_seed adds a
// further seeded phase offset per (user, resource) entry; energies and
// intra-user distances are unaffected.  M must be a power of two >= 2.
Codebook generate_codebook(const FactorGraph& graph, int order, std::uint64_t rotation_seed = 0);

// Superimposes the codewords selected by `symbols` (one per user) with unit
// gains; mostly a building block for tests and encoders.
std::vector<cplx> scma_encode(const Codebook& cb, std::span<const int> symbols);

// Per-user posterior over the M symbols; entries sum to one.
using SymbolPosterior = std::vector<double>;

// Message-passing detection on the factor graph.
//
//   received   length-Z observation
//   gains      per-user complex channel gain (zero marks an inactive user)
//   noise_var  per-resource effective noise variance, all > 0
//
// Runs `iterations` rounds of probability-domain message passing with
// Gaussian resource likelihoods exp(-|y_z - sum_j g_j x_{j,z}(s_j)|^2 / nu_z),
// messages floored at 1e-300 and renormalised to sum one, and returns the
// per-user symbol posteriors.
std::vector<SymbolPosterior> mpa_detect(std::span<const cplx> received,
                                        std::span<const cplx> gains,
                                        const Codebook& cb,
                                        std::span<const double> noise_var,
                                        int iterations);

// Symbol index <-> bit pattern bijection; position 0 is the most significant
// bit of the pattern.
struct BitMapping {
    int bits = 0;
    std::vector<std::uint32_t> symbol_to_pattern;

    static BitMapping natural(int order);

    int bit(int symbol, int position) const {
        return (symbol_to_pattern[static_cast<std::size_t>(symbol)] >> (bits - 1 - position)) & 1u;
    }
};

// Marginalises a symbol posterior into per-bit LLRs ln P(b=0) - ln P(b=1),
// clamped to [-30, 30].  The posterior must sum to one within 1e-6.
std::vector<double> posterior_to_bit_llrs(const SymbolPosterior& posterior, const BitMapping& map);

// Maximum-posterior symbol; ties resolve to the lowest index.
int hard_decision(const SymbolPosterior& posterior);

} // namespace hnoma::scma
