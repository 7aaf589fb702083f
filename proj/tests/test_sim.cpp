#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "hnoma/csv.hpp"
#include "hnoma/errors.hpp"
#include "hnoma/format.hpp"
#include "hnoma/scenario.hpp"
#include "hnoma/sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

using namespace hnoma;
using namespace hnoma::sim;

namespace {

ScenarioConfig uncoded_single(long trials, std::vector<double> grid) {
    ScenarioConfig cfg;
    cfg.mode = Mode::UncodedScma;
    cfg.groups = {GroupSpec{6}};
    cfg.snr_db = std::move(grid);
    cfg.trials = trials;
    cfg.seed = 7;
    return cfg;
}

ScenarioConfig hybrid_config(long trials, std::vector<double> grid) {
    ScenarioConfig cfg;
    cfg.mode = Mode::UncodedHnoma;
    cfg.groups = {GroupSpec{6}, GroupSpec{6}};
    cfg.snr_db = std::move(grid);
    cfg.trials = trials;
    cfg.seed = 11;
    return cfg;
}

ScenarioConfig coded_single(long trials, std::vector<double> grid) {
    ScenarioConfig cfg;
    cfg.mode = Mode::CodedScma;
    cfg.groups = {GroupSpec{6}};
    cfg.snr_db = std::move(grid);
    cfg.trials = trials;
    cfg.polar.block_length = 64;
    cfg.polar.construction_trials = 2000;
    cfg.seed = 13;
    return cfg;
}

} // namespace

TEST_CASE("mode names round trip and unknown names are rejected") {
    for (Mode m : {Mode::UncodedScma, Mode::UncodedHnoma, Mode::CodedScma, Mode::CodedHnoma})
        CHECK(mode_from_name(mode_name(m)) == m);
    CHECK(std::string(mode_name(Mode::CodedHnoma)) == "coded-hnoma");
    CHECK_THROWS_AS(mode_from_name("turbo-scma"), SchemaError);
}

TEST_CASE("a sound configuration reports no problems") {
    CHECK(uncoded_single(100, {5, 10}).problems().empty());
    CHECK(hybrid_config(100, {12, 16}).problems().empty());
    CHECK(coded_single(100, {15}).problems().empty());
}

TEST_CASE("every violation is collected in one pass") {
    ScenarioConfig cfg;
    cfg.mode = Mode::UncodedHnoma;
    cfg.groups = {GroupSpec{6, -1.0}};     // hybrid needs two groups; rho must be positive
    cfg.modulation_order = 3;              // not a power of two
    cfg.mpa_iterations = 0;                // must be >= 1
    cfg.snr_db = {10, 10};                 // not strictly increasing
    cfg.trials = 0;                        // must be >= 1
    cfg.power_ratio_db = -2.0;             // near group must be louder
    cfg.gain_variance = 0.0;               // must be positive

    const auto problems = cfg.problems();
    CHECK(problems.size() >= 7);
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    try {
        cfg.validate();
    } catch (const ConfigError& e) {
        const std::string what = e.what();
        for (const auto& p : problems) CHECK(what.find(p) != std::string::npos);
    }
}

TEST_CASE("group shape must divide the resource block") {
    auto cfg = uncoded_single(100, {10});
    cfg.groups[0].users = 5; // 5 * 2 not divisible by 4
    CHECK_FALSE(cfg.problems().empty());

    cfg = uncoded_single(100, {10});
    cfg.user_degree = 5; // exceeds resources
    CHECK_FALSE(cfg.problems().empty());

    cfg = uncoded_single(100, {10});
    cfg.groups.push_back(GroupSpec{6}); // single-group mode with two groups
    CHECK_FALSE(cfg.problems().empty());
}

TEST_CASE("coded parameter violations are caught") {
    auto cfg = coded_single(100, {15});
    cfg.polar.block_length = 63;
    CHECK_FALSE(cfg.problems().empty());

    cfg = coded_single(100, {15});
    cfg.polar.rate = 0.0;
    CHECK_FALSE(cfg.problems().empty());

    cfg = coded_single(100, {15});
    cfg.polar.rate = 0.26; // info 17, message bits 1: allowed
    CHECK(cfg.problems().empty());
    cfg.polar.rate = 0.25; // info 16 leaves no room for the crc payload
    CHECK_FALSE(cfg.problems().empty());

    cfg = coded_single(100, {15});
    cfg.polar.list_size = 0;
    CHECK_FALSE(cfg.problems().empty());

    cfg = coded_single(100, {15});
    cfg.polar.construction_trials = 999;
    CHECK_FALSE(cfg.problems().empty());
}

TEST_CASE("scenario ids are stable fingerprints of the configuration") {
    const auto a = uncoded_single(500, {5, 10});
    const auto b = uncoded_single(500, {5, 10});
    CHECK(a.scenario_id() == b.scenario_id());
    CHECK(a.scenario_id().size() == 16);
    CHECK(a.scenario_id().find_first_not_of("0123456789abcdef") == std::string::npos);

    auto c = uncoded_single(500, {5, 10});
    c.seed = 8;
    CHECK(c.scenario_id() != a.scenario_id());

    auto d = uncoded_single(501, {5, 10});
    CHECK(d.scenario_id() != a.scenario_id());

    auto e = uncoded_single(500, {5, 10.5});
    CHECK(e.scenario_id() != a.scenario_id());

    // The canonical string mentions the load-bearing fields.
    const auto canon = a.canonical_string();
    CHECK(canon.find("uncoded-scma") != std::string::npos);
    CHECK(canon.find("trials=500") != std::string::npos);
}

TEST_CASE("confidence interval arithmetic") {
    MetricCount m;
    m.errors = 25;
    m.total = 100;
    CHECK(m.rate() == doctest::Approx(0.25));
    CHECK(m.ci95() == doctest::Approx(1.96 * std::sqrt(0.25 * 0.75 / 100)).epsilon(1e-12));

    MetricCount zero;
    CHECK(zero.rate() == 0.0);
    CHECK(zero.ci95() == 0.0);

    MetricCount sure;
    sure.errors = 0;
    sure.total = 50;
    CHECK(sure.ci95() == 0.0);
}

TEST_CASE("results do not depend on the worker count") {
    const auto cfg = uncoded_single(400, {8});
    const auto one = run_point(cfg, 8.0, 1);
    const auto three = run_point(cfg, 8.0, 3);
    REQUIRE(one.groups.size() == 1);
    CHECK(one.groups[0].symbols.errors == three.groups[0].symbols.errors);
    CHECK(one.groups[0].bits.errors == three.groups[0].bits.errors);
    CHECK(one.groups[0].symbols.total == three.groups[0].symbols.total);

    const auto coded = coded_single(24, {15});
    const auto c1 = run_point(coded, 15.0, 1);
    const auto c2 = run_point(coded, 15.0, 2);
    CHECK(c1.groups[0].frames.errors == c2.groups[0].frames.errors);
    CHECK(c1.groups[0].bits.errors == c2.groups[0].bits.errors);
    CHECK(c1.groups[0].symbols.errors == c2.groups[0].symbols.errors);
}

TEST_CASE("run_point rejects off-grid operating points") {
    const auto cfg = uncoded_single(10, {8});
    CHECK_THROWS_AS(run_point(cfg, 9.0, 1), ConfigError);
}

TEST_CASE("uncoded error rates fall along the snr grid") {
    const auto cfg = uncoded_single(3000, {5, 15, 25});
    const auto result = run_scenario(cfg, 0);
    REQUIRE(result.points.size() == 3);
    CHECK(result.scenario_id == cfg.scenario_id());

    std::vector<double> ser;
    for (const auto& p : result.points) {
        REQUIRE(p.groups.size() == 1);
        ser.push_back(p.groups[0].symbols.rate());
        // Uncoded runs never populate frame counts.
        CHECK(p.groups[0].frames.total == 0);
        // Every symbol error implies 1..m bit errors.
        CHECK(p.groups[0].bits.total == 2 * p.groups[0].symbols.total);
        CHECK(p.groups[0].bits.errors >= p.groups[0].symbols.errors);
        CHECK(p.groups[0].bits.errors <= 2 * p.groups[0].symbols.errors);
    }
    CHECK(ser[0] > ser[1]);
    CHECK(ser[1] > ser[2]);
}

TEST_CASE("grid order of the callback matches the result order") {
    const auto cfg = uncoded_single(50, {5, 10, 15});
    std::vector<double> seen;
    const auto result = run_scenario(cfg, 1, [&](const PointResult& p) {
        seen.push_back(p.snr_db);
    });
    CHECK(seen == std::vector<double>{5, 10, 15});
    REQUIRE(result.points.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) CHECK(result.points[i].snr_db == seen[i]);
}

TEST_CASE("confidence intervals shrink with the square root of the sample") {
    auto small = uncoded_single(1000, {8});
    auto large = uncoded_single(4000, {8});
    const auto ps = run_point(small, 8.0, 1);
    const auto pl = run_point(large, 8.0, 1);
    const double ratio = pl.groups[0].symbols.ci95() / ps.groups[0].symbols.ci95();
    CHECK(ratio > 0.4);
    CHECK(ratio < 0.6);
}

TEST_CASE("hybrid runs produce two groups and coded runs populate frames") {
    const auto hybrid = hybrid_config(300, {12});
    const auto hr = run_scenario(hybrid, 0);
    REQUIRE(hr.points.size() == 1);
    REQUIRE(hr.points[0].groups.size() == 2);
    for (const auto& g : hr.points[0].groups) {
        CHECK(g.symbols.total == 6 * 300);
        CHECK(g.frames.total == 0);
    }

    const auto coded = coded_single(40, {15});
    const auto cr = run_scenario(coded, 0);
    REQUIRE(cr.points[0].groups.size() == 1);
    const auto& g = cr.points[0].groups[0];
    CHECK(g.frames.total == 6 * 40);             // one frame per user per trial
    CHECK(g.bits.total == 6 * 40 * 16);          // message bits only (k = 16 at n=64 r=1/2)
    CHECK(g.symbols.total == 6 * 40 * 32);       // n/m coded symbols per frame
    // A frame error requires at least one message bit error.
    CHECK(g.bits.rate() <= g.frames.rate() + 1e-12);
}

TEST_CASE("summarize flattens points in the csv row order") {
    const auto cfg = hybrid_config(100, {12, 16});
    const auto result = run_scenario(cfg, 0);
    const auto records = summarize(result);

    // 2 points x 2 groups x {ber, ser}.
    REQUIRE(records.size() == 8);
    for (const auto& r : records) CHECK(r.scenario_id == result.scenario_id);

    std::vector<std::tuple<double, int, std::string>> keys;
    for (const auto& r : records) keys.emplace_back(r.snr_db, r.group, r.metric);
    auto sorted = keys;
    std::sort(sorted.begin(), sorted.end());
    CHECK(keys == sorted);

    CHECK(records[0].snr_db == 12.0);
    CHECK(records[0].group == 1);
    CHECK(records[0].metric == "ber");
    CHECK(records[1].metric == "ser");
    CHECK(records[2].group == 2);

    for (const auto& r : records) {
        CHECK(r.trials > 0);
        CHECK(r.value == doctest::Approx(static_cast<double>(r.errors) / r.trials));
    }

    const auto coded = coded_single(20, {15});
    const auto crecords = summarize(run_scenario(coded, 0));
    REQUIRE(crecords.size() == 3);
    CHECK(crecords[0].metric == "ber");
    CHECK(crecords[1].metric == "fer");
    CHECK(crecords[2].metric == "ser");
}

TEST_CASE("rate formatting is fixed-notation with six significant digits") {
    CHECK(format_rate(0.0) == "0");
    CHECK(format_rate(1.0) == "1.00000");
    CHECK(format_rate(0.0123456) == "0.0123456");
    CHECK(format_rate(0.25) == "0.250000");
    CHECK(format_rate(0.000144) == "0.000144000");
    CHECK(format_rate(0.999999) == "0.999999");
    CHECK_THROWS_AS(format_rate(-0.1), InternalError);
    CHECK_THROWS_AS(format_rate(std::nan("")), InternalError);

    CHECK(format_double(12.0) == "12");
    CHECK(format_double(12.5) == "12.5");
    CHECK(format_double(0.1) == "0.1");
}

TEST_CASE("csv serialisation round trips records exactly") {
    std::vector<Record> records;
    Record r;
    r.scenario_id = "0123456789abcdef";
    r.snr_db = 12.5;
    r.group = 1;
    r.metric = "ser";
    r.value = 0.0123456;
    r.trials = 100000;
    r.errors = 1235;
    r.ci95 = 0.000683423;
    records.push_back(r);
    r.group = 2;
    r.metric = "ber";
    r.value = 0.0;
    r.errors = 0;
    r.ci95 = 0.0;
    records.push_back(r);

    const auto text = to_csv(records);
    CHECK(text.find(kCsvHeader) == 0);
    const auto parsed = parse_csv(text);
    REQUIRE(parsed.size() == 2);
    CHECK(parsed[0].scenario_id == records[0].scenario_id);
    CHECK(parsed[0].snr_db == records[0].snr_db);
    CHECK(parsed[0].trials == records[0].trials);
    CHECK(parsed[0].errors == records[0].errors);
    CHECK(to_csv(parsed) == text); // byte-stable through a full cycle
}

TEST_CASE("csv files are written atomically and read back") {
    const auto path = (std::filesystem::temp_directory_path() / "hnoma_csv_test.csv").string();
    std::vector<Record> records(1);
    records[0].scenario_id = "00deadbeef001122";
    records[0].snr_db = 10;
    records[0].group = 1;
    records[0].metric = "ser";
    records[0].value = 0.5;
    records[0].trials = 10;
    records[0].errors = 5;
    records[0].ci95 = 0.31;
    write_csv(path, records);
    CHECK_FALSE(std::filesystem::exists(path + ".tmp"));
    const auto back = read_csv(path);
    REQUIRE(back.size() == 1);
    CHECK(back[0] == records[0]);
    std::filesystem::remove(path);

    CHECK_THROWS_AS(read_csv("/nonexistent/results.csv"), InputError);
}

TEST_CASE("csv parser rejects malformed content") {
    CHECK_THROWS_AS(parse_csv("wrong,header\n"), InputError);
    const std::string head = std::string(kCsvHeader) + "\n";
    CHECK_THROWS_AS(parse_csv(head + "abc,10,1,ser,0.5\n"), InputError);          // field count
    CHECK_THROWS_AS(parse_csv(head + "abc,10,1,qer,0.5,10,5,0.3\n"), InputError); // metric name
    CHECK_THROWS_AS(parse_csv(head + "abc,ten,1,ser,0.5,10,5,0.3\n"), InputError); // junk number
    CHECK_THROWS_AS(parse_csv(head + "abc,10,1,ser,0.5,10,5x,0.3\n"), InputError); // trailing junk

    // Windows line endings are tolerated.
    const auto ok = parse_csv(head + "00deadbeef001122,10,1,ser,0.500000,10,5,0.309903\r\n");
    CHECK(ok.size() == 1);
}

TEST_CASE("scenario files parse into validated configurations") {
    const std::string text = R"({
        "mode": "uncoded-hnoma",
        "groups": [{"users": 6}, {"users": 6}],
        "resources": 4,
        "modulation_order": 4,
        "snr_db": [12, 16],
        "trials": 1000,
        "seed": 42,
        "power_ratio_db": 6,
        "rho": "inf"
    })";
    const auto cfg = parse_scenario(text);
    CHECK(cfg.mode == Mode::UncodedHnoma);
    REQUIRE(cfg.groups.size() == 2);
    CHECK(cfg.groups[0].users == 6);
    CHECK(std::isinf(cfg.groups[0].rho));
    CHECK(cfg.snr_db == std::vector<double>{12, 16});
    CHECK(cfg.trials == 1000);
    CHECK(cfg.seed == 42);
    CHECK(cfg.power_ratio_db == 6.0);
    CHECK(cfg.problems().empty());
}

TEST_CASE("a finite rho applies to every group") {
    const std::string text = R"({
        "mode": "uncoded-scma",
        "groups": [{"users": 12}],
        "resources": 4,
        "modulation_order": 4,
        "snr_db": [10],
        "trials": 10,
        "seed": 1,
        "rho": 1.0
    })";
    const auto cfg = parse_scenario(text);
    REQUIRE(cfg.groups.size() == 1);
    CHECK(cfg.groups[0].users == 12);
    CHECK(cfg.groups[0].rho == 1.0);
}

TEST_CASE("coded scenarios accept a polar block") {
    const std::string text = R"({
        "mode": "coded-scma",
        "groups": [{"users": 6}],
        "resources": 4,
        "modulation_order": 4,
        "snr_db": [15],
        "trials": 10,
        "seed": 3,
        "polar": {"n": 64, "rate": 0.5, "list_size": 4, "design_snr_db": 2.0,
                  "construction_trials": 2000}
    })";
    const auto cfg = parse_scenario(text);
    CHECK(cfg.polar.block_length == 64);
    CHECK(cfg.polar.rate == 0.5);
    CHECK(cfg.polar.list_size == 4);
    CHECK(cfg.polar.construction_trials == 2000);
    CHECK(cfg.problems().empty());
}

TEST_CASE("schema violations are reported together") {
    const std::string text = R"({
        "mode": "uncoded-scma",
        "groups": [{"users": 6}],
        "snr_db": [10],
        "trials": 10,
        "seed": 1,
        "power_ratio_db": 6,
        "polar": {"n": 64},
        "bogus_key": true
    })";
    try {
        parse_scenario(text);
        FAIL("expected a schema error");
    } catch (const SchemaError& e) {
        const std::string what = e.what();
        CHECK(what.find("power_ratio_db") != std::string::npos); // forbidden for this mode
        CHECK(what.find("polar") != std::string::npos);          // forbidden for uncoded
        CHECK(what.find("bogus_key") != std::string::npos);      // unknown key
    }

    CHECK_THROWS_AS(parse_scenario("{\"mode\": \"uncoded-scma\"}"), SchemaError); // missing keys
    CHECK_THROWS_AS(parse_scenario("not json at all"), SchemaError);
    CHECK_THROWS_AS(parse_scenario(R"({"mode": 7})"), SchemaError);
    CHECK_THROWS_AS(load_scenario("/nonexistent/scenario.json"), InputError);
}
