#pragma once

#include <string>
#include <vector>

namespace feedsim {

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

CsvTable read_csv(const std::string& path);
void write_csv(const std::string& path, const CsvTable& table);

// Shortest exact decimal form that round-trips a double; empty for NaN
// (the missing-value convention for all emitted files).
std::string format_number(double x);

// Inverse of format_number; empty field parses to NaN.
double parse_number(const std::string& field);

}  // namespace feedsim
