#include "harvest/csv.hpp"

#include <cmath>
#include <cstdio>

#include "harvest/error.hpp"

namespace harvest {

namespace {

std::string quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + '"';
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

CsvWriter::CsvWriter(const std::filesystem::path& path, const std::string& config_hash, std::uint64_t seed,
                     const std::vector<std::string>& columns)
    : out_(path, std::ios::binary), columns_(columns.size()), path_(path) {
  if (!out_) throw Error("cannot write " + path.string());
  out_ << "# config_hash=" << config_hash << " seed=" << seed << '\n';
  for (std::size_t k = 0; k < columns.size(); ++k) out_ << (k ? "," : "") << columns[k];
  out_ << '\n';
}

void CsvWriter::row(const std::vector<CsvCell>& cells) {
  if (cells.size() != columns_) throw std::invalid_argument("CsvWriter: row width differs from header in " +
                                                           path_.string());
  for (std::size_t k = 0; k < cells.size(); ++k) {
    if (k) out_ << ',';
    std::visit(
        [&](const auto& c) {
          using T = std::decay_t<decltype(c)>;
          if constexpr (std::is_same_v<T, double>) {
            out_ << format_double(c);
          } else if constexpr (std::is_same_v<T, std::string>) {
            out_ << quote(c);
          } else {
            out_ << c;
          }
        },
        cells[k]);
  }
  out_ << '\n';
  ++rows_;
}

}  // namespace harvest
