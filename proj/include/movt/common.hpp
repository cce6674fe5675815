#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace movt {

// Error taxonomy mirrored by process exit codes: ConfigError -> 2,
// DataError / IoError -> 3, NumericFault -> 4.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

struct DataError : std::runtime_error {
    explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

struct IoError : std::runtime_error {
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

struct NumericFault : std::runtime_error {
    explicit NumericFault(const std::string& what) : std::runtime_error(what) {}
};

template <typename T>
bool all_finite(const T* data, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(data[i])) return false;
    }
    return true;
}

template <typename T>
void require_finite(const T* data, std::size_t n, const std::string& where) {
    if (!all_finite(data, n)) throw NumericFault("non-finite values in " + where);
}

}  // namespace movt
