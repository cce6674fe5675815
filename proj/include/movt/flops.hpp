#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "movt/model.hpp"

namespace movt::model {

// Analytic compute accounting. Multiply-adds count as 2 FLOPs; bias adds are
// counted separately. Normalizations, activations, softmax, and pooling are
// treated as free, so the totals are the dense-algebra cost only. Pure
// functions of config: no weights involved.

struct LedgerRow {
    std::string name;
    std::uint64_t params = 0;
    std::uint64_t flops = 0;
};

struct ComputeReport {
    std::vector<LedgerRow> rows;
    std::uint64_t total_params = 0;
    std::uint64_t total_flops = 0;

    double gflops() const { return static_cast<double>(total_flops) * 1e-9; }
};

std::uint64_t params_linear(std::uint64_t in, std::uint64_t out);
std::uint64_t flops_linear(std::uint64_t tokens, std::uint64_t in, std::uint64_t out);
std::uint64_t params_conv1d(std::uint64_t kernel, std::uint64_t in, std::uint64_t out);
std::uint64_t flops_conv1d(std::uint64_t rows, std::uint64_t time, std::uint64_t kernel,
                           std::uint64_t in, std::uint64_t out);

// Full per-layer ledger at the given input extents.
ComputeReport movt_compute(const MovTConfig& cfg, std::size_t tracks, std::size_t frames);
ComputeReport pixt_compute(const PixTConfig& cfg, std::size_t frames);

std::uint64_t count_params(const MovTConfig& cfg);
std::uint64_t count_params(const PixTConfig& cfg);
double count_gflops(const MovTConfig& cfg, std::size_t tracks, std::size_t frames);
double count_gflops(const PixTConfig& cfg, std::size_t frames);

}  // namespace movt::model
