#pragma once

// Minimal numeric CSV support: header row, comma separated, no quoting.

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace dso::csv {

class CsvError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    /// Column index, or -1.
    int find_column(std::string_view name) const;
    /// Column index; throws CsvError if absent.
    int column(std::string_view name) const;
};

Table read(std::istream& is);

/// Shortest decimal text that parses back to the same double.
std::string num(double v);

int to_int(std::string_view s);
double to_double(std::string_view s);

}  // namespace dso::csv
