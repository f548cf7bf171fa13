#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <variant>
#include <vector>

namespace harvest {

using CsvCell = std::variant<double, long long, std::string>;

/// CSV file that opens with a comment line carrying the config hash and seed,
/// then a header row. Doubles are written with 17 significant digits.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::string& config_hash, std::uint64_t seed,
            const std::vector<std::string>& columns);

  void row(const std::vector<CsvCell>& cells);
  std::size_t rows() const noexcept { return rows_; }

 private:
  std::ofstream out_;
  std::size_t columns_ = 0;
  std::size_t rows_ = 0;
  std::filesystem::path path_;
};

std::string format_double(double v);

}  // namespace harvest
