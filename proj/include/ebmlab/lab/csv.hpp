#pragma once

// Minimal CSV writer: header first, LF endings, reals at 17 significant
// digits via std::to_chars so output never depends on the locale.

#include <cstdint>
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

namespace ebmlab::lab {

using Cell = std::variant<double, std::int64_t, std::string>;

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<Cell>> rows;

  /// Throws SizeMismatch when the row width differs from the header.
  void add_row(std::vector<Cell> row);
};

/// 17 significant digits; "nan", "inf" and "-inf" for non-finite values.
std::string format_real(double value);

/// Quotes fields containing a comma, quote, CR or LF.
std::string quote_field(const std::string& field);

std::string to_csv(const Table& table);

/// Throws Error(IoFailure) if the file cannot be written.
void emit_csv(const Table& table, const std::filesystem::path& path);

}  // namespace ebmlab::lab
