#pragma once

// File plumbing for the command-line front end: CSV ingestion, round-trip
// number formatting and all-or-nothing output writes.

#include "rankest/core.hpp"

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace rankest::io {

/// Header plus numeric rows. Blank lines are skipped.
struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
};

Table parse_csv(std::string_view text, bool require_header = true);
std::string read_file(const std::filesystem::path& path);

/// Builds a Sample from named columns y, x1..xK and optional r, v, w.
Sample sample_from_table(const Table& table);
Sample read_sample(const std::filesystem::path& path);

/// One column of numbers. The header is optional; `column` picks a named
/// column, otherwise the file must have exactly one.
std::vector<double> read_column(const std::filesystem::path& path, const std::string& column = {});

/// 17 significant digits.
std::string fmt(double value);

/// Comma-separated numbers, e.g. "1,2.5,-3".
std::vector<double> parse_list(std::string_view text);

/// Writes through a sibling temp file and renames it into place.
void write_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace rankest::io
