#pragma once

// Small helpers shared by the line-oriented file formats.

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace stacktherm::text {

struct Line {
    int number;  // 1-based
    std::vector<std::string> fields;
};

/// Splits `text` into non-empty, non-comment lines of whitespace-separated
/// fields. A `#` starts a comment that runs to the end of the line.
std::vector<Line> tokenize(std::string_view text);

/// Comment lines (starting with `#`) only, with the leading `#` and blanks removed.
std::vector<Line> comment_lines(std::string_view text);

/// Shortest decimal representation that parses back to the same double.
std::string format_double(double value);

/// Fixed number of significant digits, `%.*g` style.
std::string format_sig(double value, int digits);

/// Strict parse of a full field; throws Error{Parse} naming `what` and `line`.
double parse_double(const std::string& field, std::string_view what, int line);
long parse_long(const std::string& field, std::string_view what, int line);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view content);

}  // namespace stacktherm::text
