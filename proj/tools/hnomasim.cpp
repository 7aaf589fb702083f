#include "hnoma/csv.hpp"
#include "hnoma/errors.hpp"
#include "hnoma/format.hpp"
#include "hnoma/reference.hpp"
#include "hnoma/scenario.hpp"
#include "hnoma/sim.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <optional>
#include <string>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitSchema = 3;
constexpr int kExitRuntime = 4;
constexpr int kExitValidation = 5;

int env_workers() {
    const char* raw = std::getenv("HNOMASIM_WORKERS");
    if (!raw || !*raw) return 0;
    char* end = nullptr;
    const long v = std::strtol(raw, &end, 10);
    if (end == raw || *end != '\0' || v < 1)
        throw hnoma::InputError("HNOMASIM_WORKERS must be a positive integer");
    return static_cast<int>(v);
}

std::vector<double> parse_snr_list(const std::string& text) {
    std::vector<double> grid;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t comma = text.find(',', pos);
        const std::string tok =
            text.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
        try {
            std::size_t used = 0;
            grid.push_back(std::stod(tok, &used));
            if (used != tok.size()) throw std::invalid_argument("trailing characters");
        } catch (const std::exception&) {
            throw hnoma::InputError("bad --snr-list entry '" + tok + "'");
        }
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    return grid;
}

void echo_config(const hnoma::sim::ScenarioConfig& cfg, int workers) {
    using hnoma::format_double;
    std::printf("scenario id:       %s\n", cfg.scenario_id().c_str());
    std::printf("mode:              %s\n", hnoma::sim::mode_name(cfg.mode));
    if (cfg.hybrid())
        std::printf("groups:            far %d users, near %d users\n", cfg.groups[0].users,
                    cfg.groups[1].users);
    else
        std::printf("groups:            1 (%d users)\n", cfg.groups[0].users);
    std::printf("resources:         %d\n", cfg.resources);
    std::printf("modulation order:  %d\n", cfg.modulation_order);
    std::printf("overload factor:   %.0f%%\n", 100.0 * cfg.overload_factor());
    std::printf("mpa iterations:    %d\n", cfg.mpa_iterations);
    if (cfg.hybrid())
        std::printf("power ratio:       %s dB (near over far)\n",
                    format_double(cfg.power_ratio_db).c_str());
    for (std::size_t k = 0; k < cfg.groups.size(); ++k) {
        if (std::isinf(cfg.groups[k].rho))
            std::printf("csi quality g%zu:    exact\n", k + 1);
        else
            std::printf("csi quality g%zu:    rho=%s\n", k + 1,
                        format_double(cfg.groups[k].rho).c_str());
    }
    if (cfg.coded())
        std::printf("polar code:        n=%d rate=%s list=%d design=%s dB\n",
                    cfg.polar.block_length, format_double(cfg.polar.rate).c_str(),
                    cfg.polar.list_size, format_double(cfg.polar.design_snr_db).c_str());
    std::string grid;
    for (std::size_t i = 0; i < cfg.snr_db.size(); ++i) {
        if (i) grid += ' ';
        grid += format_double(cfg.snr_db[i]);
    }
    std::printf("snr grid [dB]:     %s\n", grid.c_str());
    std::printf("trials per point:  %ld\n", cfg.trials);
    std::printf("seed:              %llu\n", static_cast<unsigned long long>(cfg.seed));
    std::printf("workers:           %s\n", workers == 0 ? "auto" : std::to_string(workers).c_str());
    std::fflush(stdout);
}

void print_point(const hnoma::sim::PointResult& point, bool coded) {
    std::string line = "point snr=" + hnoma::format_double(point.snr_db) + " dB";
    for (std::size_t k = 0; k < point.groups.size(); ++k) {
        const auto& g = point.groups[k];
        line += "  g" + std::to_string(k + 1);
        line += " ser=" + hnoma::format_rate(g.symbols.rate());
        line += " ber=" + hnoma::format_rate(g.bits.rate());
        if (coded) line += " fer=" + hnoma::format_rate(g.frames.rate());
    }
    std::printf("%s\n", line.c_str());
    std::fflush(stdout);

    auto advise = [&](std::size_t k, const char* metric, const hnoma::sim::MetricCount& c) {
        if (c.errors < 100)
            std::fprintf(stderr,
                         "warning: snr=%s dB g%zu %s has only %lld errors; "
                         "the interval is loose, consider more trials\n",
                         hnoma::format_double(point.snr_db).c_str(), k + 1, metric,
                         static_cast<long long>(c.errors));
    };
    for (std::size_t k = 0; k < point.groups.size(); ++k) {
        advise(k, "ser", point.groups[k].symbols);
        advise(k, "ber", point.groups[k].bits);
        if (coded) advise(k, "fer", point.groups[k].frames);
    }
}

int cmd_run(const std::string& scenario_path, const std::string& output_path,
            const std::optional<std::uint64_t>& seed, const std::optional<long>& trials,
            const std::optional<std::string>& snr_list, int workers_flag) {
    auto cfg = hnoma::sim::load_scenario(scenario_path);
    if (seed) cfg.seed = *seed;
    if (trials) cfg.trials = *trials;
    if (snr_list) cfg.snr_db = parse_snr_list(*snr_list);
    cfg.validate();

    const int workers = workers_flag > 0 ? workers_flag : env_workers();
    echo_config(cfg, workers);

    const bool coded = cfg.coded();
    const auto result = hnoma::sim::run_scenario(
        cfg, workers, [&](const hnoma::sim::PointResult& p) { print_point(p, coded); });

    hnoma::sim::write_csv(output_path, hnoma::sim::summarize(result));
    std::printf("wrote %s in %.1f s\n", output_path.c_str(), result.duration_seconds);
    return kExitOk;
}

int cmd_construct(int n, double rate, double design_snr_db, long trials, std::uint64_t seed,
                  const std::string& out_path) {
    const int info = static_cast<int>(std::lround(n * rate));
    const auto spec = hnoma::polar::construct_monte_carlo(n, info, design_snr_db, trials, seed);
    hnoma::polar::save_frozen_set(out_path, spec);
    std::printf("constructed n=%d with %d info bits (%d message + %d crc), %zu frozen\n",
                spec.block_length, spec.info_count(), spec.message_bits, spec.crc.bits,
                spec.frozen_set.size());
    std::printf("wrote %s\n", out_path.c_str());
    return kExitOk;
}

int cmd_validate(const std::string& frozen_path) {
    const auto start = std::chrono::steady_clock::now();
    const auto results = hnoma::reference::run_validation(frozen_path);
    bool all_pass = true;
    for (const auto& r : results) {
        std::printf("%s  %-28s %s\n", r.pass ? "PASS" : "FAIL", r.name.c_str(), r.detail.c_str());
        all_pass = all_pass && r.pass;
    }
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%zu checks in %.1f s\n", results.size(), elapsed);
    if (elapsed > 300.0)
        std::fprintf(stderr, "warning: validation exceeded its five-minute budget\n");
    return all_pass ? kExitOk : kExitValidation;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"link-level simulator for superposed SCMA groups"};
    app.require_subcommand(1);

    // run
    auto* run = app.add_subcommand("run", "simulate a scenario file and write a results csv");
    std::string scenario_path;
    std::string output_path = "results.csv";
    std::optional<std::uint64_t> seed_override;
    std::optional<long> trials_override;
    std::optional<std::string> snr_override;
    int workers_flag = 0;
    run->add_option("scenario", scenario_path, "scenario json file")->required();
    run->add_option("-o,--output", output_path, "results csv path");
    run->add_option("--seed", seed_override, "override the scenario seed");
    run->add_option("--trials", trials_override, "override the trial count per point");
    run->add_option("--snr-list", snr_override, "override the snr grid, comma separated dB");
    run->add_option("--workers", workers_flag, "worker threads (otherwise HNOMASIM_WORKERS or auto)");

    // construct-polar
    auto* construct = app.add_subcommand("construct-polar", "rank bit channels and save a frozen set");
    int cp_n = 256;
    double cp_rate = 0.5;
    double cp_design = 2.0;
    long cp_trials = 100000;
    std::uint64_t cp_seed = 1;
    std::string cp_out;
    construct->add_option("--n", cp_n, "block length (power of two)");
    construct->add_option("--rate", cp_rate, "code rate counting the crc as info");
    construct->add_option("--design-snr-db", cp_design, "construction snr in dB");
    construct->add_option("--trials", cp_trials, "construction trials");
    construct->add_option("--seed", cp_seed, "construction seed");
    construct->add_option("--out", cp_out, "frozen-set output file")->required();

    // validate
    auto* validate = app.add_subcommand("validate", "run the cross-implementation checks");
    std::string frozen_path;
    validate->add_option("--frozen-set", frozen_path, "also round-trip this frozen-set file");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (run->parsed())
            return cmd_run(scenario_path, output_path, seed_override, trials_override,
                           snr_override, workers_flag);
        if (construct->parsed())
            return cmd_construct(cp_n, cp_rate, cp_design, cp_trials, cp_seed, cp_out);
        if (validate->parsed()) return cmd_validate(frozen_path);
    } catch (const hnoma::SchemaError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitSchema;
    } catch (const hnoma::InputError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitUsage;
    } catch (const hnoma::ConfigError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitRuntime;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitRuntime;
    }
    return kExitUsage;
}
