#pragma once

#include <string>
#include <vector>

#include "movt/common.hpp"

namespace movt::csvio {

// Minimal CSV: comma separation, newline rows, no quoting (emitted fields
// never contain commas). Numbers are formatted by the caller, usually with
// num9 so that re-parsing recovers the value to float precision.

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

// 9 significant digits, shortest form ("%.9g").
std::string num9(double v);

void save_rows(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);

// Throws DataError on ragged rows or an empty file.
CsvTable load_rows(const std::string& path);

double parse_double(const std::string& field, const std::string& context);
long long parse_int(const std::string& field, const std::string& context);

}  // namespace movt::csvio
