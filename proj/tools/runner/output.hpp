#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace hagedorn::runner {

inline constexpr int kCsvVersion = 1;

/// Shortest round-trip decimal form, identical on every run.
std::string format_number(double x);
std::string format_optional(const std::optional<double>& x);

/// CSV table whose first line is a versioned comment naming the columns.
class CsvTable {
 public:
  CsvTable(std::string kind, std::vector<std::string> columns);

  void add(std::vector<std::string> row);
  std::string str() const;
  void write(const std::filesystem::path& path) const;
  std::size_t rows() const noexcept { return rows_.size(); }

 private:
  std::string kind_;
  std::vector<std::string> columns_;
  std::vector<std::vector<std::string>> rows_;
};

void write_json(const std::filesystem::path& path, const nlohmann::json& j);

/// Directory name for one hbar run, e.g. "hbar_0.05".
std::string run_directory(double hbar);

}  // namespace hagedorn::runner
