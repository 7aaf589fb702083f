// End-to-end checks of the command line binary. Every test spawns the real
// executable (path injected by the build as HNOMASIM_BIN) and inspects exit
// codes, captured streams, and the files it writes.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

struct CommandResult {
    int exit_code = -1;
    std::string out;
    std::string err;
};

fs::path scratch_dir() {
    static const fs::path dir = [] {
        auto d = fs::temp_directory_path() /
                 ("hnomasim-cli-" + std::to_string(static_cast<long>(::getpid())));
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

fs::path scratch_file(const std::string& name) {
    static int counter = 0;
    return scratch_dir() / (std::to_string(counter++) + "-" + name);
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void spit(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    REQUIRE(out.good());
    out << text;
}

// Runs the binary through the shell so stream redirection and environment
// prefixes stay trivial. The optional prefix is prepended verbatim, e.g.
// "env HNOMASIM_WORKERS=3".
CommandResult run_cli(const std::string& args, const std::string& env_prefix = "") {
    const fs::path out_path = scratch_file("stdout.txt");
    const fs::path err_path = scratch_file("stderr.txt");
    std::string cmd;
    if (!env_prefix.empty()) cmd += env_prefix + " ";
    cmd += "\"";
    cmd += HNOMASIM_BIN;
    cmd += "\" " + args;
    cmd += " >\"" + out_path.string() + "\" 2>\"" + err_path.string() + "\"";
    const int status = std::system(cmd.c_str());
    CommandResult r;
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(out_path);
    r.err = slurp(err_path);
    return r;
}

fs::path write_scenario(const std::string& body) {
    const fs::path path = scratch_file("scenario.json");
    spit(path, body);
    return path;
}

const std::string kMiniScenario = R"({
    "mode": "uncoded-scma",
    "groups": [{"users": 6}],
    "resources": 4,
    "modulation_order": 4,
    "snr_db": [8],
    "trials": 200,
    "seed": 5
})";

constexpr const char* kCsvHeader = "scenario_id,snr_db,group,metric,value,trials,errors,ci95";

} // namespace

TEST_CASE("invoking without a subcommand is a usage error") {
    const auto r = run_cli("");
    CHECK(r.exit_code == 2);
}

TEST_CASE("help exits cleanly and names the subcommands") {
    const auto r = run_cli("--help");
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("run") != std::string::npos);
    CHECK(r.out.find("construct-polar") != std::string::npos);
    CHECK(r.out.find("validate") != std::string::npos);
}

TEST_CASE("unknown flags are usage errors") {
    const auto scenario = write_scenario(kMiniScenario);
    const auto r = run_cli("run \"" + scenario.string() + "\" --frobnicate");
    CHECK(r.exit_code == 2);
}

TEST_CASE("a missing scenario file is an input error") {
    const auto r = run_cli("run /nonexistent/scenario.json");
    CHECK(r.exit_code == 2);
    CHECK(r.err.find("error:") != std::string::npos);
}

TEST_CASE("schema problems are reported together on stderr") {
    const auto scenario = write_scenario(R"({
        "mode": "uncoded-scma",
        "groups": [{"users": 6}],
        "resources": 4,
        "modulation_order": 4,
        "snr_db": [8],
        "bogus_key": 1
    })");
    const auto r = run_cli("run \"" + scenario.string() + "\"");
    CHECK(r.exit_code == 3);
    CHECK(r.err.find("trials") != std::string::npos);
    CHECK(r.err.find("seed") != std::string::npos);
    CHECK(r.err.find("bogus_key") != std::string::npos);
}

TEST_CASE("run writes the results csv with the exact header") {
    const auto scenario = write_scenario(kMiniScenario);
    const fs::path csv = scratch_file("out.csv");
    const auto r = run_cli("run \"" + scenario.string() + "\" -o \"" + csv.string() + "\"");
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("scenario id:") != std::string::npos);
    CHECK(r.out.find("trials per point:  200") != std::string::npos);
    CHECK(r.out.find("wrote " + csv.string()) != std::string::npos);

    const std::string text = slurp(csv);
    CHECK(text.rfind(std::string(kCsvHeader) + "\n", 0) == 0);
    // one snr point, one group, ber + ser
    CHECK(std::count(text.begin(), text.end(), '\n') == 3);
}

TEST_CASE("reruns with the same seed are byte identical across worker counts") {
    const auto scenario = write_scenario(kMiniScenario);
    const fs::path a = scratch_file("a.csv");
    const fs::path b = scratch_file("b.csv");
    const fs::path c = scratch_file("c.csv");
    CHECK(run_cli("run \"" + scenario.string() + "\" -o \"" + a.string() + "\" --workers 1")
              .exit_code == 0);
    CHECK(run_cli("run \"" + scenario.string() + "\" -o \"" + b.string() + "\" --workers 3")
              .exit_code == 0);
    CHECK(run_cli("run \"" + scenario.string() + "\" -o \"" + c.string() + "\"",
                  "env HNOMASIM_WORKERS=2")
              .exit_code == 0);
    const std::string ref = slurp(a);
    CHECK(slurp(b) == ref);
    CHECK(slurp(c) == ref);
}

TEST_CASE("command line overrides reshape the run") {
    const auto scenario = write_scenario(kMiniScenario);
    const fs::path base = scratch_file("base.csv");
    const fs::path over = scratch_file("over.csv");
    CHECK(run_cli("run \"" + scenario.string() + "\" -o \"" + base.string() + "\"").exit_code ==
          0);
    const auto r = run_cli("run \"" + scenario.string() + "\" -o \"" + over.string() +
                           "\" --seed 9 --trials 120 --snr-list 6,10");
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("trials per point:  120") != std::string::npos);
    CHECK(r.out.find("6 10") != std::string::npos);

    const std::string text = slurp(over);
    CHECK(std::count(text.begin(), text.end(), '\n') == 5); // header + 2 snr x 2 metrics
    CHECK(text.find(",6,") != std::string::npos);
    CHECK(text.find(",10,") != std::string::npos);
    CHECK(text != slurp(base)); // overrides land in the scenario id
}

TEST_CASE("a bad snr list entry is a usage error") {
    const auto scenario = write_scenario(kMiniScenario);
    const auto r = run_cli("run \"" + scenario.string() + "\" --snr-list 5x,8");
    CHECK(r.exit_code == 2);
}

TEST_CASE("an override that breaks the configuration is a config error") {
    const auto scenario = write_scenario(kMiniScenario);
    const auto r = run_cli("run \"" + scenario.string() + "\" --trials 0");
    CHECK(r.exit_code == 4);
    CHECK(r.err.find("error:") != std::string::npos);
}

TEST_CASE("a malformed worker environment variable is rejected") {
    const auto scenario = write_scenario(kMiniScenario);
    CHECK(run_cli("run \"" + scenario.string() + "\"", "env HNOMASIM_WORKERS=abc").exit_code == 2);
    CHECK(run_cli("run \"" + scenario.string() + "\"", "env HNOMASIM_WORKERS=0").exit_code == 2);
}

TEST_CASE("construct-polar writes a frozen set that validates") {
    const fs::path frozen = scratch_file("frozen.txt");
    const auto r = run_cli("construct-polar --n 64 --rate 0.5 --trials 2000 --seed 3 --out \"" +
                           frozen.string() + "\"");
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("constructed n=64 with 32 info bits") != std::string::npos);
    CHECK(slurp(frozen).rfind("n=64", 0) == 0);

    const auto v = run_cli("validate --frozen-set \"" + frozen.string() + "\"");
    CHECK(v.exit_code == 0);
    CHECK(v.out.find("FAIL") == std::string::npos);
}

TEST_CASE("construct-polar rejects a block length that is not a power of two") {
    const fs::path frozen = scratch_file("frozen.txt");
    const auto r = run_cli("construct-polar --n 63 --out \"" + frozen.string() + "\"");
    CHECK(r.exit_code == 4);
}

TEST_CASE("construct-polar requires an output path") {
    const auto r = run_cli("construct-polar --n 64");
    CHECK(r.exit_code == 2);
}

TEST_CASE("validate passes and prints one line per check") {
    const auto r = run_cli("validate");
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("crc-test-vectors") != std::string::npos);
    CHECK(r.out.find("detector-exact-on-tree") != std::string::npos);
    CHECK(r.out.find("FAIL") == std::string::npos);
    int pass_lines = 0;
    std::istringstream lines(r.out);
    for (std::string line; std::getline(lines, line);)
        if (line.rfind("PASS", 0) == 0) ++pass_lines;
    CHECK(pass_lines >= 10);
}

TEST_CASE("a corrupt frozen set fails validation") {
    const fs::path frozen = scratch_file("frozen.txt");
    spit(frozen, "garbage\n");
    const auto r = run_cli("validate --frozen-set \"" + frozen.string() + "\"");
    CHECK(r.exit_code == 5);
    CHECK(r.out.find("FAIL") != std::string::npos);
}
