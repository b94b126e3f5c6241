#ifndef SVOC_REPORT_HPP_
#define SVOC_REPORT_HPP_

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "svoc/state.hpp"

namespace svoc {

/// 17 significant digits, the format used for every CSV number.
std::string format_number(double value);

/// "t,<column>" header followed by one row per sample.
std::string trajectory_csv(const Trajectory& trajectory, const std::string& column = "value");

std::string table_csv(const std::vector<std::string>& header, const std::vector<std::vector<double>>& rows);

/// Two-space indented JSON with a trailing newline.
std::string json_text(const nlohmann::ordered_json& doc);

/// Writes the whole file; throws IoError on failure.
void write_text_file(const std::filesystem::path& path, const std::string& content);

}  // namespace svoc

#endif  // SVOC_REPORT_HPP_
