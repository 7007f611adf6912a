#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <string>
#include <string_view>
#include <vector>

namespace crs {

struct TsvRow {
    std::size_t line = 0;
    std::vector<std::string> fields;
};

/// Reads a UTF-8 TSV stream. Blank lines and lines whose first non-blank
/// character is '#' are skipped; a trailing '\r' is stripped. Rows with a
/// column count outside [min_fields, max_fields] raise ParseError.
std::vector<TsvRow> read_tsv(std::istream& in, std::size_t min_fields, std::size_t max_fields);

/// Opens a file for reading or throws Error(UnreadableSource).
std::ifstream open_input(const std::filesystem::path& path);

/// Whole-file read; throws Error(UnreadableSource).
std::string read_file(const std::filesystem::path& path);

/// 64-bit FNV-1a, used for content fingerprints.
std::uint64_t fnv1a(std::string_view data, std::uint64_t seed = 0xcbf29ce484222325ull);
std::string hex64(std::uint64_t value);

}  // namespace crs
