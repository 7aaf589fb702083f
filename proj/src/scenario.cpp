#include "hnoma/scenario.hpp"

#include "hnoma/errors.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace hnoma::sim {
namespace {

using nlohmann::json;

class Collector {
  public:
    void add(std::string issue) { issues_.push_back(std::move(issue)); }
    void raise_if_any() const {
        if (issues_.empty()) return;
        std::string msg = "scenario rejected:";
        for (const std::string& s : issues_) msg += "\n  - " + s;
        throw SchemaError(msg);
    }

  private:
    std::vector<std::string> issues_;
};

void check_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where,
                Collector& errors) {
    for (const auto& item : obj.items())
        if (!allowed.count(item.key()))
            errors.add("unknown key '" + where + item.key() + "'");
}

bool get_int(const json& obj, const char* key, const std::string& where, Collector& errors,
             long long& out) {
    if (!obj.contains(key)) return false;
    const json& v = obj.at(key);
    if (!v.is_number_integer()) {
        errors.add("'" + where + key + "' must be an integer");
        return false;
    }
    out = v.get<long long>();
    return true;
}

bool get_number(const json& obj, const char* key, const std::string& where, Collector& errors,
                double& out) {
    if (!obj.contains(key)) return false;
    const json& v = obj.at(key);
    if (!v.is_number()) {
        errors.add("'" + where + key + "' must be a number");
        return false;
    }
    out = v.get<double>();
    return true;
}

// rho accepts a positive number or the string "inf".
bool get_rho(const json& obj, const char* key, const std::string& where, Collector& errors,
             double& out) {
    if (!obj.contains(key)) return false;
    const json& v = obj.at(key);
    if (v.is_string()) {
        if (v.get<std::string>() == "inf") {
            out = std::numeric_limits<double>::infinity();
            return true;
        }
        errors.add("'" + where + key + "' must be a number or \"inf\"");
        return false;
    }
    if (v.is_number()) {
        out = v.get<double>();
        return true;
    }
    errors.add("'" + where + key + "' must be a number or \"inf\"");
    return false;
}

} // namespace

ScenarioConfig parse_scenario(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw SchemaError(std::string("scenario is not valid JSON: ") + e.what());
    }

    Collector errors;
    if (!root.is_object()) {
        errors.add("top level must be a JSON object");
        errors.raise_if_any();
    }

    ScenarioConfig cfg;

    static const std::set<std::string> top_keys = {
        "schema_version", "mode",   "groups",         "resources", "modulation_order",
        "snr_db",         "trials", "seed",           "mpa_iterations",
        "power_ratio_db", "rho",    "sigma_h2",       "polar"};
    check_keys(root, top_keys, "", errors);

    long long schema_version = 1;
    if (get_int(root, "schema_version", "", errors, schema_version) && schema_version != 1)
        errors.add("unsupported schema_version " + std::to_string(schema_version));

    bool have_mode = false;
    if (!root.contains("mode")) {
        errors.add("missing required key 'mode'");
    } else if (!root.at("mode").is_string()) {
        errors.add("'mode' must be a string");
    } else {
        try {
            cfg.mode = mode_from_name(root.at("mode").get<std::string>());
            have_mode = true;
        } catch (const SchemaError& e) {
            errors.add(e.what());
        }
    }

    double rho = std::numeric_limits<double>::infinity();
    get_rho(root, "rho", "", errors, rho);

    if (!root.contains("groups")) {
        errors.add("missing required key 'groups'");
    } else if (!root.at("groups").is_array() || root.at("groups").empty()) {
        errors.add("'groups' must be a non-empty array");
    } else {
        const json& groups = root.at("groups");
        for (std::size_t k = 0; k < groups.size(); ++k) {
            const std::string where = "groups[" + std::to_string(k) + "].";
            GroupSpec g;
            g.rho = rho;
            if (!groups[k].is_object()) {
                errors.add("'groups[" + std::to_string(k) + "]' must be an object");
                cfg.groups.push_back(g);
                continue;
            }
            check_keys(groups[k], {"users"}, where, errors);
            long long users = 0;
            if (!groups[k].contains("users"))
                errors.add("missing required key '" + where + "users'");
            if (get_int(groups[k], "users", where, errors, users))
                g.users = static_cast<int>(users);
            cfg.groups.push_back(g);
        }
    }

    long long value = 0;
    if (!root.contains("resources")) errors.add("missing required key 'resources'");
    if (get_int(root, "resources", "", errors, value)) cfg.resources = static_cast<int>(value);

    if (!root.contains("modulation_order")) errors.add("missing required key 'modulation_order'");
    if (get_int(root, "modulation_order", "", errors, value))
        cfg.modulation_order = static_cast<int>(value);

    if (!root.contains("snr_db")) {
        errors.add("missing required key 'snr_db'");
    } else if (!root.at("snr_db").is_array()) {
        errors.add("'snr_db' must be an array of numbers");
    } else {
        bool ok = true;
        for (const json& v : root.at("snr_db"))
            if (!v.is_number()) ok = false;
        if (!ok) {
            errors.add("'snr_db' must be an array of numbers");
        } else {
            cfg.snr_db.clear();
            for (const json& v : root.at("snr_db")) cfg.snr_db.push_back(v.get<double>());
        }
    }

    if (!root.contains("trials")) errors.add("missing required key 'trials'");
    if (get_int(root, "trials", "", errors, value)) cfg.trials = value;

    if (!root.contains("seed")) {
        errors.add("missing required key 'seed'");
    } else if (!root.at("seed").is_number_integer() ||
               (root.at("seed").is_number_integer() && !root.at("seed").is_number_unsigned() &&
                root.at("seed").get<long long>() < 0)) {
        errors.add("'seed' must be a non-negative integer");
    } else {
        cfg.seed = root.at("seed").get<std::uint64_t>();
    }

    if (get_int(root, "mpa_iterations", "", errors, value))
        cfg.mpa_iterations = static_cast<int>(value);

    const bool hybrid = have_mode && cfg.hybrid();
    if (root.contains("power_ratio_db")) {
        if (have_mode && !hybrid)
            errors.add("'power_ratio_db' is only valid for the two-group modes");
        double ratio = cfg.power_ratio_db;
        if (get_number(root, "power_ratio_db", "", errors, ratio)) cfg.power_ratio_db = ratio;
    }

    double sigma = cfg.gain_variance;
    if (get_number(root, "sigma_h2", "", errors, sigma)) cfg.gain_variance = sigma;

    const bool coded = have_mode && cfg.coded();
    if (root.contains("polar")) {
        if (have_mode && !coded) errors.add("'polar' is only valid for the coded modes");
        const json& polar = root.at("polar");
        if (!polar.is_object()) {
            errors.add("'polar' must be an object");
        } else {
            check_keys(polar, {"n", "rate", "list_size", "design_snr_db", "construction_trials"},
                       "polar.", errors);
            if (get_int(polar, "n", "polar.", errors, value))
                cfg.polar.block_length = static_cast<int>(value);
            double num = cfg.polar.rate;
            if (get_number(polar, "rate", "polar.", errors, num)) cfg.polar.rate = num;
            if (get_int(polar, "list_size", "polar.", errors, value))
                cfg.polar.list_size = static_cast<int>(value);
            num = cfg.polar.design_snr_db;
            if (get_number(polar, "design_snr_db", "polar.", errors, num))
                cfg.polar.design_snr_db = num;
            if (get_int(polar, "construction_trials", "polar.", errors, value))
                cfg.polar.construction_trials = value;
        }
    }

    errors.raise_if_any();
    return cfg;
}

ScenarioConfig load_scenario(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open scenario file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_scenario(buf.str());
}

} // namespace hnoma::sim
