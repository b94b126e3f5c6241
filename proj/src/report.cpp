#include "svoc/report.hpp"

#include <cstdio>
#include <fstream>

#include "svoc/errors.hpp"

namespace svoc {

std::string format_number(double value) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

std::string trajectory_csv(const Trajectory& trajectory, const std::string& column) {
  std::string out = "t," + column + "\n";
  for (std::size_t i = 0; i < trajectory.size(); ++i) {
    out += format_number(trajectory.time(i));
    out += ',';
    out += format_number(trajectory[i]);
    out += '\n';
  }
  return out;
}

std::string table_csv(const std::vector<std::string>& header, const std::vector<std::vector<double>>& rows) {
  std::string out;
  for (std::size_t i = 0; i < header.size(); ++i) out += (i ? "," : "") + header[i];
  out += '\n';
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + format_number(row[i]);
    out += '\n';
  }
  return out;
}

std::string json_text(const nlohmann::ordered_json& doc) { return doc.dump(2) + "\n"; }

void write_text_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw IoError("cannot open '" + path.string() + "' for writing");
  file << content;
  file.close();
  if (!file) throw IoError("failed writing '" + path.string() + "'");
}

}  // namespace svoc
