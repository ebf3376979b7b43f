#pragma once

#include <optional>
#include <string>
#include <vector>

namespace bargainlab::csv {

// Minimal strict CSV: comma-separated, no quoting (schema.md bans commas
// inside fields), trailing \r tolerated, empty field = missing value.
struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    int column(const std::string& name) const; // -1 when absent
};

Table read_csv(const std::string& path);
void write_csv(const std::string& path, const Table& t);

// Locale-independent float formatting used for every emitted file; %.17g
// round-trips doubles exactly, %.*g variants serve display tables.
std::string format_double(double v, int precision = 17);
std::optional<double> parse_double(const std::string& field); // nullopt when empty
// Parses or throws ValidationError mentioning what was being parsed.
double parse_double_strict(const std::string& field, const std::string& context);

} // namespace bargainlab::csv
