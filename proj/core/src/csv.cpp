#include "bargainlab/csv.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>

#include "bargainlab/errors.hpp"

namespace bargainlab::csv {

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find(',', start);
        if (pos == std::string::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    if (!out.empty() && !out.back().empty() && out.back().back() == '\r') {
        out.back().pop_back();
    }
    return out;
}

} // namespace

int Table::column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == name) return static_cast<int>(i);
    }
    return -1;
}

Table read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open '" + path + "' for reading");
    }
    Table t;
    std::string line;
    if (!std::getline(in, line)) {
        throw ValidationError("'" + path + "' is empty, expected a header row");
    }
    t.header = split_line(line);
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        auto fields = split_line(line);
        if (fields.size() != t.header.size()) {
            throw ValidationError(path + ":" + std::to_string(lineno) + ": expected " +
                                  std::to_string(t.header.size()) + " fields, found " +
                                  std::to_string(fields.size()));
        }
        t.rows.push_back(std::move(fields));
    }
    return t;
}

void write_csv(const std::string& path, const Table& t) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) {
        throw IoError("cannot open '" + path + "' for writing");
    }
    for (std::size_t i = 0; i < t.header.size(); ++i) {
        if (i) out << ',';
        out << t.header[i];
    }
    out << '\n';
    for (const auto& row : t.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out << ',';
            out << row[i];
        }
        out << '\n';
    }
    if (!out) {
        throw IoError("write failed for '" + path + "'");
    }
}

std::string format_double(double v, int precision) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", precision, v);
    return buf;
}

std::optional<double> parse_double(const std::string& field) {
    if (field.empty()) return std::nullopt;
    double v = 0.0;
    const char* begin = field.data();
    const char* end = begin + field.size();
    auto [ptr, ec] = std::from_chars(begin, end, v);
    if (ec != std::errc() || ptr != end) {
        throw ValidationError("malformed number '" + field + "'");
    }
    return v;
}

double parse_double_strict(const std::string& field, const std::string& context) {
    auto v = parse_double(field);
    if (!v) {
        throw ValidationError(context + ": value required but field is empty");
    }
    return *v;
}

} // namespace bargainlab::csv
