#include "output.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "hagedorn/errors.hpp"

namespace hagedorn::runner {

std::string format_number(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

std::string format_optional(const std::optional<double>& x) { return x ? format_number(*x) : "NA"; }

CsvTable::CsvTable(std::string kind, std::vector<std::string> columns)
    : kind_(std::move(kind)), columns_(std::move(columns)) {}

void CsvTable::add(std::vector<std::string> row) {
  require(row.size() == columns_.size(), "CSV row has the wrong number of fields");
  rows_.push_back(std::move(row));
}

std::string CsvTable::str() const {
  std::ostringstream os;
  os << "# hagedorn-run " << kind_ << " csv v" << kCsvVersion << ":";
  for (const auto& c : columns_) os << ' ' << c;
  os << '\n';
  for (std::size_t i = 0; i < columns_.size(); ++i) os << (i ? "," : "") << columns_[i];
  os << '\n';
  for (const auto& r : rows_) {
    for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << r[i];
    os << '\n';
  }
  return os.str();
}

void CsvTable::write(const std::filesystem::path& path) const {
  std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) raise(ErrorCode::InvalidArgument, "cannot write " + path.string());
  out << str();
}

void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) raise(ErrorCode::InvalidArgument, "cannot write " + path.string());
  out << j.dump(2) << '\n';
}

std::string run_directory(double hbar) { return "hbar_" + format_number(hbar); }

}  // namespace hagedorn::runner
