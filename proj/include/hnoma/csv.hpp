#pragma once

#include "hnoma/sim.hpp"

#include <string>
#include <vector>

namespace hnoma::sim {

// Column order is part of the file contract; readers key on the header.
inline constexpr const char* kCsvHeader = "scenario_id,snr_db,group,metric,value,trials,errors,ci95";

std::string to_csv(const std::vector<Record>& records);

// Writes via a temporary in the target directory and renames into place, so a
// crashed run never leaves a truncated file behind.
void write_csv(const std::string& path, const std::vector<Record>& records);

std::vector<Record> parse_csv(const std::string& text);
std::vector<Record> read_csv(const std::string& path);

} // namespace hnoma::sim
