#include "dso/csv.hpp"

#include <charconv>
#include <istream>

namespace dso::csv {

int Table::find_column(std::string_view name) const {
    for (std::size_t k = 0; k < header.size(); ++k) {
        if (header[k] == name) return static_cast<int>(k);
    }
    return -1;
}

int Table::column(std::string_view name) const {
    const int k = find_column(name);
    if (k < 0) throw CsvError("missing CSV column '" + std::string(name) + "'");
    return k;
}

namespace {

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (;;) {
        const std::size_t comma = line.find(',', start);
        out.push_back(line.substr(start, comma == std::string::npos ? std::string::npos : comma - start));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    for (auto& cell : out) {
        while (!cell.empty() && (cell.back() == ' ' || cell.back() == '\r')) cell.pop_back();
        std::size_t lead = 0;
        while (lead < cell.size() && cell[lead] == ' ') ++lead;
        cell.erase(0, lead);
    }
    return out;
}

}  // namespace

Table read(std::istream& is) {
    Table tab;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        auto cells = split(line);
        if (tab.header.empty()) {
            tab.header = std::move(cells);
            continue;
        }
        if (cells.size() != tab.header.size()) {
            throw CsvError("CSV line " + std::to_string(lineno) + " has " + std::to_string(cells.size()) +
                           " fields, expected " + std::to_string(tab.header.size()));
        }
        tab.rows.push_back(std::move(cells));
    }
    if (tab.header.empty()) throw CsvError("CSV input is empty");
    return tab;
}

std::string num(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

int to_int(std::string_view s) {
    int v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
        throw CsvError("not an integer: '" + std::string(s) + "'");
    }
    return v;
}

double to_double(std::string_view s) {
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
        throw CsvError("not a number: '" + std::string(s) + "'");
    }
    return v;
}

}  // namespace dso::csv
