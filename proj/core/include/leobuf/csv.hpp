#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

namespace leobuf {

/// Shortest decimal that round-trips to the same double.
std::string format_double(double v);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

/// Comma-separated, '\n'-terminated rows. Fields are written verbatim.
void write_csv(std::ostream& out, const CsvTable& table);

} // namespace leobuf
