#include "hnoma/csv.hpp"

#include "hnoma/errors.hpp"
#include "hnoma/format.hpp"

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace hnoma::sim {
namespace {

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string::npos) {
            fields.push_back(line.substr(start));
            return fields;
        }
        fields.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
}

template <typename T>
T parse_number(const std::string& field, const char* what, std::size_t line_no) {
    T value{};
    const char* first = field.data();
    const char* last = field.data() + field.size();
    const auto res = std::from_chars(first, last, value);
    if (res.ec != std::errc{} || res.ptr != last)
        throw InputError("line " + std::to_string(line_no) + ": bad " + what + " '" + field + "'");
    return value;
}

} // namespace

std::string to_csv(const std::vector<Record>& records) {
    std::string out = kCsvHeader;
    out += '\n';
    for (const Record& r : records) {
        out += r.scenario_id;
        out += ',';
        out += format_double(r.snr_db);
        out += ',';
        out += std::to_string(r.group);
        out += ',';
        out += r.metric;
        out += ',';
        out += format_rate(r.value);
        out += ',';
        out += std::to_string(r.trials);
        out += ',';
        out += std::to_string(r.errors);
        out += ',';
        out += format_rate(r.ci95);
        out += '\n';
    }
    return out;
}

void write_csv(const std::string& path, const std::vector<Record>& records) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    const fs::path dir = target.parent_path().empty() ? fs::path(".") : target.parent_path();
    const fs::path tmp = dir / (target.filename().string() + ".tmp");

    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw InputError("cannot open '" + tmp.string() + "' for writing");
        out << to_csv(records);
        out.flush();
        if (!out) throw InputError("write to '" + tmp.string() + "' failed");
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) {
        fs::remove(tmp);
        throw InputError("cannot move results into '" + path + "': " + ec.message());
    }
}

std::vector<Record> parse_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;

    if (!std::getline(in, line)) throw InputError("empty results file");
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kCsvHeader)
        throw InputError("unexpected header '" + line + "'");

    std::vector<Record> records;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto fields = split_fields(line);
        if (fields.size() != 8)
            throw InputError("line " + std::to_string(line_no) + ": expected 8 fields, got " +
                             std::to_string(fields.size()));
        Record r;
        r.scenario_id = fields[0];
        r.snr_db = parse_number<double>(fields[1], "snr_db", line_no);
        r.group = parse_number<int>(fields[2], "group", line_no);
        r.metric = fields[3];
        if (r.metric != "ber" && r.metric != "fer" && r.metric != "ser")
            throw InputError("line " + std::to_string(line_no) + ": unknown metric '" + r.metric +
                             "'");
        r.value = parse_number<double>(fields[4], "value", line_no);
        r.trials = parse_number<long long>(fields[5], "trials", line_no);
        r.errors = parse_number<long long>(fields[6], "errors", line_no);
        r.ci95 = parse_number<double>(fields[7], "ci95", line_no);
        records.push_back(std::move(r));
    }
    return records;
}

std::vector<Record> read_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_csv(buf.str());
}

} // namespace hnoma::sim
