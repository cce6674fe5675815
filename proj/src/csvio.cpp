#include "movt/csvio.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace movt::csvio {

std::string num9(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

void save_rows(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for write: " + path);
    auto write_row = [&out](const std::vector<std::string>& row) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out << ',';
            out << row[i];
        }
        out << '\n';
    };
    write_row(header);
    for (const auto& row : rows) {
        if (row.size() != header.size())
            throw DataError("csv row width " + std::to_string(row.size()) +
                            " does not match header width " + std::to_string(header.size()));
        write_row(row);
    }
    if (!out) throw IoError("write failed: " + path);
}

static std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    fields.push_back(cur);
    return fields;
}

CsvTable load_rows(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open: " + path);
    CsvTable table;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty() && in.peek() == EOF) break;
        auto fields = split_line(line);
        if (first) {
            table.header = std::move(fields);
            first = false;
        } else {
            if (fields.size() != table.header.size())
                throw DataError(path + ": row " + std::to_string(table.rows.size() + 2) +
                                " has " + std::to_string(fields.size()) + " fields, expected " +
                                std::to_string(table.header.size()));
            table.rows.push_back(std::move(fields));
        }
    }
    if (first) throw DataError(path + ": empty csv");
    return table;
}

double parse_double(const std::string& field, const std::string& context) {
    errno = 0;
    char* end = nullptr;
    double v = std::strtod(field.c_str(), &end);
    if (end == field.c_str() || *end != '\0' || errno == ERANGE)
        throw DataError(context + ": not a number: '" + field + "'");
    return v;
}

long long parse_int(const std::string& field, const std::string& context) {
    errno = 0;
    char* end = nullptr;
    long long v = std::strtoll(field.c_str(), &end, 10);
    if (end == field.c_str() || *end != '\0' || errno == ERANGE)
        throw DataError(context + ": not an integer: '" + field + "'");
    return v;
}

}  // namespace movt::csvio
