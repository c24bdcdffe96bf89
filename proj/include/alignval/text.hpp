#pragma once

// Small string utilities shared by the parsers and writers.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace alignval::text {

// Shortest fixed-notation decimal that parses back to exactly `value`.
std::string format_real(double value);

// Locale-independent decimal parse of the whole string.
std::optional<double> parse_real(std::string_view s);

std::string_view trim(std::string_view s);
std::vector<std::string> split_whitespace(std::string_view s);

bool is_valid_utf8(std::string_view s);
// Decode one code point starting at s[pos]; returns 0 length on invalid input.
std::pair<char32_t, std::size_t> decode_utf8(std::string_view s, std::size_t pos);
void append_utf8(std::string& out, char32_t cp);
std::size_t utf8_length(std::string_view s);

// Lowercases ASCII, Latin-1 and Latin Extended-A letters.
std::string fold_case(std::string_view s);

// RFC 4180 field quoting (only when needed).
std::string csv_field(std::string_view s);
// Splits one CSV record; handles quoted fields with doubled quotes.
std::vector<std::string> parse_csv_line(std::string_view line);
// Splits a whole document into records, honouring quoted newlines.
std::vector<std::vector<std::string>> parse_csv(std::string_view doc);

std::string xml_escape(std::string_view s);

std::string read_file(const std::string& path);
// Writes to a temporary sibling and renames over the target.
void write_file_atomic(const std::string& path, std::string_view contents);

}  // namespace alignval::text
