#pragma once

#include "reshape/blackbox.hpp"
#include "reshape/data.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace reshape {

/// Delimited text (comma, semicolon, tab, or spaces), one observation per
/// row. With `header`, the first row holds column names and is returned in
/// `names` when non-null. Throws ParseError with the line number.
DataMatrix read_matrix(const std::filesystem::path& path, bool header, std::vector<std::string>* names = nullptr);

/// One value per row.
std::vector<double> read_column(const std::filesystem::path& path, bool header = false);

/// Rows `i,k,v,value` with 1-based indices after a required header row.
/// Returned entries are 0-based.
std::vector<TensorEntry> read_tensor(const std::filesystem::path& path);

/// Writes a grid in the same layout read_tensor accepts.
void write_tensor(const std::filesystem::path& path, const BlackBoxGrid& grid);

/// Parses a decimal floating-point number exactly; throws ParseError.
double parse_double(const std::string& token, const std::string& where);

/// Splits one delimited line into trimmed tokens.
std::vector<std::string> split_fields(const std::string& line);

}  // namespace reshape
