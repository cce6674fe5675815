#pragma once

#include <unistd.h>

#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <string>
#include <vector>

#include "movt/rng.hpp"
#include "movt/tensor.hpp"

namespace testutil {

template <typename T>
void fill_uniform(T* data, std::size_t n, movt::Rng& rng, double lo = -1.0, double hi = 1.0) {
    for (std::size_t i = 0; i < n; ++i) data[i] = static_cast<T>(rng.uniform(lo, hi));
}

template <typename T>
void fill_uniform(movt::nn::Tensor<T>& t, movt::Rng& rng, double lo = -1.0, double hi = 1.0) {
    fill_uniform(t.ptr(), t.numel(), rng, lo, hi);
}

template <typename T>
bool bitwise_equal(const std::vector<T>& a, const std::vector<T>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (std::memcmp(&a[i], &b[i], sizeof(T)) != 0) return false;
    }
    return true;
}

template <typename T>
double max_abs_diff(const std::vector<T>& a, const std::vector<T>& b) {
    double m = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        m = std::max(m, std::abs(static_cast<double>(a[i]) - static_cast<double>(b[i])));
    }
    return m;
}

// Self-deleting scratch directory for file-format tests.
class TempDir {
  public:
    explicit TempDir(const std::string& tag) {
        path_ = std::filesystem::temp_directory_path() /
                ("movt_test_" + tag + "_" + std::to_string(::getpid()));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() { std::filesystem::remove_all(path_); }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    std::string file(const std::string& name) const { return (path_ / name).string(); }
    std::string str() const { return path_.string(); }

  private:
    std::filesystem::path path_;
};

}  // namespace testutil
