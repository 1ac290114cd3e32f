#pragma once

#include <cstddef>
#include <filesystem>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace macroalloc {

std::string trim(std::string_view s);
std::string to_lower(std::string_view s);
std::string to_upper(std::string_view s);
bool starts_with_ci(std::string_view s, std::string_view prefix);

/// Splits one CSV record. Double-quoted fields may contain commas and `""` escapes.
std::vector<std::string> split_csv_line(std::string_view line);
std::string csv_escape(std::string_view field);

struct CsvRow {
    std::size_t line = 0;
    std::vector<std::string> fields;
};

/// Header-checked CSV reader. Blank lines are skipped; line numbers count the header as 1.
class CsvReader {
public:
    CsvReader(std::istream& in, std::string source, std::vector<std::string> expected_header);

    /// Next row, or nullopt at end of stream. Throws ParseError on a column-count mismatch.
    std::optional<CsvRow> next();
    [[nodiscard]] const std::string& source() const { return source_; }

private:
    std::istream& in_;
    std::string source_;
    std::size_t columns_;
    std::size_t line_ = 0;
};

std::string read_file(const std::filesystem::path& path);
/// Writes via a temporary sibling and rename, creating parent directories.
void write_file(const std::filesystem::path& path, std::string_view content);
void append_file(const std::filesystem::path& path, std::string_view content);

}  // namespace macroalloc
