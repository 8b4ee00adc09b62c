#include "levybdsde/cli/output.hpp"

#include <cstdio>
#include <fstream>
#include <system_error>

#include "levybdsde/errors.hpp"

namespace levybdsde::cli {

std::uint64_t fnv1a64(const std::string& data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(value));
  return buf;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_atomic(const std::filesystem::path& path, const std::string& content) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  if (ec) throw ConfigError("cli", "cannot create output directory '" + path.parent_path().string() + "': " + ec.message());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cli", "cannot write '" + tmp.string() + "'");
    out << content;
    out.flush();
    if (!out) throw ConfigError("cli", "write to '" + tmp.string() + "' failed");
  }
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw ConfigError("cli", "cannot move '" + tmp.string() + "' into place: " + ec.message());
}

CsvWriter::CsvWriter(const std::string& config_hash, const std::vector<std::string>& columns)
    : columns_(columns.size()) {
  head_ = "# config_hash=" + config_hash + "\n";
  for (std::size_t i = 0; i < columns.size(); ++i) body_ += (i ? "," : "") + columns[i];
  body_ += "\n";
}

void CsvWriter::comment(const std::string& key, const std::string& value) { head_ += "# " + key + "=" + value + "\n"; }

void CsvWriter::row(const std::vector<double>& values) {
  if (values.size() != columns_) throw std::logic_error("csv row width does not match header");
  for (std::size_t i = 0; i < values.size(); ++i) body_ += (i ? "," : "") + format_double(values[i]);
  body_ += "\n";
}

std::string CsvWriter::str() const { return head_ + body_; }

std::string json_with_hash(nlohmann::json doc, const std::string& config_hash) {
  doc["config_hash"] = config_hash;
  return doc.dump(2) + "\n";
}

}  // namespace levybdsde::cli
