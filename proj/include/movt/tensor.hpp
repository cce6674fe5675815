#pragma once

#include <cstddef>
#include <initializer_list>
#include <numeric>
#include <string>
#include <vector>

#include "movt/common.hpp"

namespace movt::nn {

// Dense row-major tensor. Layout is always contiguous; kernels take raw
// pointers plus explicit extents, this type only owns storage and shape.
template <typename T>
struct Tensor {
    std::vector<std::size_t> shape;
    std::vector<T> data;

    Tensor() = default;
    explicit Tensor(std::vector<std::size_t> s) : shape(std::move(s)) {
        data.assign(numel_of(shape), T(0));
    }
    Tensor(std::initializer_list<std::size_t> s) : Tensor(std::vector<std::size_t>(s)) {}

    static std::size_t numel_of(const std::vector<std::size_t>& s) {
        std::size_t n = 1;
        for (std::size_t d : s) n *= d;
        return n;
    }

    std::size_t numel() const { return data.size(); }
    std::size_t dim(std::size_t i) const { return shape.at(i); }
    T* ptr() { return data.data(); }
    const T* ptr() const { return data.data(); }

    void fill(T v) { std::fill(data.begin(), data.end(), v); }

    void reshape(std::vector<std::size_t> s) {
        if (numel_of(s) != data.size()) throw ConfigError("reshape changes element count");
        shape = std::move(s);
    }

    template <typename U>
    Tensor<U> cast() const {
        Tensor<U> out;
        out.shape = shape;
        out.data.resize(data.size());
        for (std::size_t i = 0; i < data.size(); ++i) out.data[i] = static_cast<U>(data[i]);
        return out;
    }
};

}  // namespace movt::nn
