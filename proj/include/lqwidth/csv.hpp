#pragma once

#include <cstddef>
#include <filesystem>
#include <ostream>
#include <string>
#include <type_traits>
#include <vector>

namespace lqwidth {

/// Shortest round-trip decimal form, so identical runs give identical bytes.
std::string format_number(double v);

/// In-memory CSV table; cells are stored already formatted.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header);

  template <typename... Ts>
  void add(const Ts&... values) {
    std::vector<std::string> row;
    (row.push_back(cell(values)), ...);
    add_row(std::move(row));
  }
  void add_row(std::vector<std::string> row);

  const std::vector<std::string>& header() const { return header_; }
  const std::vector<std::vector<std::string>>& rows() const { return rows_; }

  void write(std::ostream& os) const;
  void write(const std::filesystem::path& path) const;

 private:
  template <typename T>
  static std::string cell(const T& v) {
    if constexpr (std::is_same_v<T, bool>) {
      return v ? "yes" : "no";
    } else if constexpr (std::is_floating_point_v<T>) {
      return format_number(static_cast<double>(v));
    } else if constexpr (std::is_integral_v<T>) {
      return std::to_string(v);
    } else {
      return std::string(v);
    }
  }

  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

}  // namespace lqwidth
