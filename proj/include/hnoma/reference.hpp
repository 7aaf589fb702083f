#pragma once

#include "hnoma/polar.hpp"
#include "hnoma/scma.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

// Slow, structurally independent counterparts of the production algorithms.
// They exist to cross-check the fast paths and are shared by the test suite
// and the self-validation command.
namespace hnoma::reference {

// Exact symbol posteriors obtained by enumerating every joint hypothesis
// (M^J terms) instead of message passing.
std::vector<scma::SymbolPosterior> exact_marginals(std::span<const scma::cplx> received,
                                                   std::span<const scma::cplx> gains,
                                                   const scma::Codebook& codebook,
                                                   std::span<const double> noise_variance);

// Plain successive cancellation via direct recursion on LLR spans.  Returns
// all n input-domain decisions (frozen positions are zero).
std::vector<std::uint8_t> sc_decode(std::span<const double> channel_llrs,
                                    const polar::PolarCodeSpec& spec);

struct CheckResult {
    std::string name;
    bool pass = false;
    std::string detail;
};

// Cross-implementation consistency suite.  When `frozen_set_path` is empty the
// file round-trip check uses a temporary file; otherwise it loads the given
// file and verifies it reproduces itself.
std::vector<CheckResult> run_validation(const std::string& frozen_set_path = std::string());

} // namespace hnoma::reference
