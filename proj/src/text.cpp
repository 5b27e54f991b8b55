#include "stacktherm/text.hpp"

#include <array>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "stacktherm/error.hpp"

namespace stacktherm::text {

namespace {
bool is_blank(char c) { return c == ' ' || c == '\t' || c == '\r'; }

std::vector<std::string> split_fields(std::string_view s) {
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && is_blank(s[i])) ++i;
        std::size_t j = i;
        while (j < s.size() && !is_blank(s[j])) ++j;
        if (j > i) out.emplace_back(s.substr(i, j - i));
        i = j;
    }
    return out;
}

template <typename F>
void for_each_line(std::string_view text, F&& f) {
    int number = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        ++number;
        f(number, text.substr(pos, end - pos));
        if (end == text.size()) break;
        pos = end + 1;
    }
}
}  // namespace

std::vector<Line> tokenize(std::string_view text) {
    std::vector<Line> lines;
    for_each_line(text, [&](int number, std::string_view raw) {
        auto hash = raw.find('#');
        if (hash != std::string_view::npos) raw = raw.substr(0, hash);
        auto fields = split_fields(raw);
        if (!fields.empty()) lines.push_back(Line{number, std::move(fields)});
    });
    return lines;
}

std::vector<Line> comment_lines(std::string_view text) {
    std::vector<Line> lines;
    for_each_line(text, [&](int number, std::string_view raw) {
        std::size_t i = 0;
        while (i < raw.size() && is_blank(raw[i])) ++i;
        if (i < raw.size() && raw[i] == '#') {
            auto fields = split_fields(raw.substr(i + 1));
            lines.push_back(Line{number, std::move(fields)});
        }
    });
    return lines;
}

std::string format_double(double value) {
    std::array<char, 64> buf{};
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
    return std::string(buf.data(), ptr);
}

std::string format_sig(double value, int digits) {
    std::array<char, 64> buf{};
    int n = std::snprintf(buf.data(), buf.size(), "%.*g", digits, value);
    return std::string(buf.data(), static_cast<std::size_t>(n));
}

double parse_double(const std::string& field, std::string_view what, int line) {
    double value = 0.0;
    const char* first = field.data();
    const char* last = field.data() + field.size();
    if (!field.empty() && field.front() == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last) {
        throw Error(ErrorKind::Parse, "expected a number for " + std::string(what) + ", got '" + field + "'",
                    {std::string(what)}, line);
    }
    return value;
}

long parse_long(const std::string& field, std::string_view what, int line) {
    long value = 0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc{} || ptr != field.data() + field.size()) {
        throw Error(ErrorKind::Parse, "expected an integer for " + std::string(what) + ", got '" + field + "'",
                    {std::string(what)}, line);
    }
    return value;
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) out += sep;
        out += parts[i];
    }
    return out;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::Io, "cannot read '" + path + "'", {path});
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, std::string_view content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::Io, "cannot write '" + path + "'", {path});
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
}

}  // namespace stacktherm::text
