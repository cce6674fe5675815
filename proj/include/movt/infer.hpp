#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "movt/dataset.hpp"
#include "movt/evalmetrics.hpp"
#include "movt/fusion.hpp"
#include "movt/model.hpp"

namespace movt::infer {

struct BatchOutputs {
    nn::Tensor<float> outputs;     // [indices, head width]
    nn::Tensor<float> embeddings;  // [indices, token dim]
};

// Eval-mode batched forward over the selected samples, in index order.
BatchOutputs movt_infer(const model::MovTModel<float>& m, const data::Dataset& ds,
                        const std::vector<std::size_t>& idx, std::size_t batch = 64);
BatchOutputs pixt_infer(const model::PixTModel<float>& m, const data::Dataset& ds,
                        const std::vector<std::size_t>& idx, std::size_t batch = 8);

// Classification records (softmaxed outputs + labels) for the metric suite.
std::vector<eval::PredictionRecord> records_from_outputs(const nn::Tensor<float>& outputs,
                                                         const data::Dataset& ds,
                                                         const std::vector<std::size_t>& idx);

fusion::LogitsTable logits_from_outputs(const nn::Tensor<float>& outputs,
                                        const data::Dataset& ds,
                                        const std::vector<std::size_t>& idx,
                                        std::string source, double gflops);

// CSV rows (id, label, e0..e{D-1}) in index order, 9 significant digits.
void export_embeddings(const std::string& path, const nn::Tensor<float>& embeddings,
                       const data::Dataset& ds, const std::vector<std::size_t>& idx);

}  // namespace movt::infer
