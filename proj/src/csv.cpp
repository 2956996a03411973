#include "lqwidth/csv.hpp"

#include <charconv>
#include <fstream>
#include <stdexcept>

namespace lqwidth {

std::string format_number(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

CsvTable::CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

void CsvTable::add_row(std::vector<std::string> row) {
  if (row.size() != header_.size()) throw std::logic_error("CsvTable: row width does not match header");
  rows_.push_back(std::move(row));
}

namespace {
void write_line(std::ostream& os, const std::vector<std::string>& cells) {
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) os << ',';
    const bool quote = cells[i].find_first_of(",\"\n") != std::string::npos;
    if (!quote) {
      os << cells[i];
      continue;
    }
    os << '"';
    for (char c : cells[i]) os << (c == '"' ? "\"\"" : std::string(1, c));
    os << '"';
  }
  os << '\n';
}
}  // namespace

void CsvTable::write(std::ostream& os) const {
  write_line(os, header_);
  for (const auto& r : rows_) write_line(os, r);
}

void CsvTable::write(const std::filesystem::path& path) const {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  write(os);
}

}  // namespace lqwidth
