#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

namespace levybdsde::cli {

std::uint64_t fnv1a64(const std::string& data);
std::string hex64(std::uint64_t value);

// Writes through a temporary file in the same directory and renames it into
// place, so readers never observe a partial file.
void write_atomic(const std::filesystem::path& path, const std::string& content);

// CSV with a "# config_hash=..." first line and full-precision numbers.
class CsvWriter {
 public:
  CsvWriter(const std::string& config_hash, const std::vector<std::string>& columns);

  void comment(const std::string& key, const std::string& value);
  void row(const std::vector<double>& values);
  std::string str() const;

 private:
  std::string head_;
  std::string body_;
  std::size_t columns_;
};

std::string format_double(double v);

// JSON text with the config hash embedded as a top-level field.
std::string json_with_hash(nlohmann::json doc, const std::string& config_hash);

}  // namespace levybdsde::cli
