#pragma once

#include "hnoma/polar.hpp"
#include "hnoma/scma.hpp"

#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

namespace hnoma::sim {

enum class Mode { UncodedScma, UncodedHnoma, CodedScma, CodedHnoma };

const char* mode_name(Mode mode);
Mode mode_from_name(const std::string& name); // throws SchemaError on unknown names

struct PolarParams {
    int block_length = 64;
    double rate = 0.5;
    int list_size = 4;
    double design_snr_db = 2.0;
    long construction_trials = 100000;
    std::uint64_t construction_seed = 1;

    int info_count() const; // round(n * rate)
};

struct GroupSpec {
    int users = 0;
    double rho = std::numeric_limits<double>::infinity(); // estimation quality
};

// How often fading (and its estimate) is redrawn in coded runs.  Uncoded runs
// always redraw per symbol.
enum class FadingDynamics { PerSymbol, PerFrame };

struct ScenarioConfig {
    Mode mode = Mode::UncodedScma;
    std::vector<GroupSpec> groups; // far first, then near (two for hybrid modes)
    int resources = 4;             // Z
    int modulation_order = 4;      // M
    int user_degree = 2;           // d_v
    int mpa_iterations = 10;
    std::vector<double> snr_db;    // strictly increasing
    long trials = 0;               // symbols (uncoded) or frames (coded) per point
    double power_ratio_db = 6.0;   // near/far, hybrid modes only
    double gain_variance = 1.0;    // sigma_h^2
    PolarParams polar;
    FadingDynamics coded_fading = FadingDynamics::PerSymbol;
    std::uint64_t seed = 0;

    bool coded() const { return mode == Mode::CodedScma || mode == Mode::CodedHnoma; }
    bool hybrid() const { return mode == Mode::UncodedHnoma || mode == Mode::CodedHnoma; }
    double overload_factor() const;

    // All constraint violations, empty when the config is sound.
    std::vector<std::string> problems() const;
    void validate() const; // throws ConfigError listing every problem

    std::string canonical_string() const;
    std::uint64_t fingerprint() const;
    std::string scenario_id() const; // fingerprint as 16 hex digits
};

struct MetricCount {
    long long errors = 0;
    long long total = 0;

    double rate() const { return total ? static_cast<double>(errors) / total : 0.0; }
    double ci95() const; // 1.96 * sqrt(p(1-p)/total)
};

struct GroupPointStats {
    MetricCount symbols;
    MetricCount bits;
    MetricCount frames; // populated in coded modes only
};

struct PointResult {
    double snr_db = 0.0;
    std::vector<GroupPointStats> groups;
};

struct SimResult {
    ScenarioConfig config;
    std::vector<PointResult> points;
    std::string scenario_id;
    double duration_seconds = 0.0;
};

// One CSV row: (scenario, snr, group, metric) with its error counts.
struct Record {
    std::string scenario_id;
    double snr_db = 0.0;
    int group = 0;            // 1-based
    std::string metric;       // "ber" | "fer" | "ser"
    double value = 0.0;
    long long trials = 0;     // metric denominator
    long long errors = 0;
    double ci95 = 0.0;

    bool operator==(const Record&) const = default;
};

// Simulates one SNR grid point; snr_db must be a grid member.  workers = 0
// uses one per available processor.  Results are independent of the worker
// count.
PointResult run_point(const ScenarioConfig& config, double snr_db, int workers = 0);

// All grid points plus timing and the scenario fingerprint.  `on_point` fires
// after each finished point, in grid order.
using PointCallback = std::function<void(const PointResult&)>;
SimResult run_scenario(const ScenarioConfig& config, int workers = 0,
                       const PointCallback& on_point = {});

// Flattens a result into records ordered by (snr ascending, group ascending,
// metric name ascending).  Uncoded runs emit ber/ser, coded runs ber/fer/ser.
std::vector<Record> summarize(const SimResult& result);

} // namespace hnoma::sim
