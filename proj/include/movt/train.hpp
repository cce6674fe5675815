#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "movt/common.hpp"
#include "movt/dataset.hpp"
#include "movt/model.hpp"
#include "movt/optim.hpp"

namespace movt::train {

enum class LossKind { cross_entropy, mse };

const char* loss_name(LossKind k);
LossKind parse_loss(const std::string& name);

struct TrainConfig {
    std::size_t epochs = 50;
    double lr = 1e-4;
    std::size_t batch_size = 32;
    std::uint64_t seed = 0;
    double max_norm = 1.0;  // global gradient-norm clip
    double weight_decay = 0.01;
    nn::PlateauScheduler::Config plateau{};
    LossKind loss = LossKind::cross_entropy;
    std::string run_dir;  // when set, best checkpoint saved to <run_dir>/checkpoints/best.ckpt

    void validate() const;
};

struct EpochRecord {
    std::size_t epoch = 0;  // 1-based
    double train_loss = 0;
    double val_loss = 0;
    double val_metric = 0;  // classification: top-1 accuracy; regression: RMSE
    double lr = 0;          // rate used during this epoch
};

struct TrainReport {
    std::vector<EpochRecord> epochs;
    std::size_t best_epoch = 0;  // 1-based epoch whose weights were retained
    double best_val_loss = 0;
    std::string checkpoint_path;  // relative to run_dir; empty when in-memory only
    double wall_seconds = 0;
};

// include_timing=false omits wall_seconds so reports from identical (seed,
// config, data) runs compare bit-for-bit.
std::string train_report_to_json(const TrainReport& r, bool include_timing = true);

// Full protocol: per epoch, shuffled minibatches of forward -> loss ->
// backward -> gradient clip -> optimizer step; validation loss drives the
// plateau scheduler; the best-validation-loss weights are retained and
// restored into the model on return. Deterministic per cfg.seed. Numeric
// faults carry epoch/batch coordinates.
TrainReport train_movt(model::MovTModel<float>& m, const data::Dataset& ds,
                       const data::SplitIndices& split, const TrainConfig& cfg);
TrainReport train_pixt(model::PixTModel<float>& m, const data::Dataset& ds,
                       const data::SplitIndices& split, const TrainConfig& cfg);

struct ClipAggregate {
    std::vector<double> probs;   // arithmetic mean of the clip probabilities
    std::size_t predicted = 0;   // argmax, ties to the lowest index
};

// Video-level prediction from per-clip probability vectors. Throws DataError
// on an empty list, mismatched widths, or a vector not summing to 1 +- 1e-5.
ClipAggregate aggregate_clips(const std::vector<std::vector<double>>& clip_probs);

struct ProbeResult {
    double accuracy = 0;
    std::size_t embed_dim = 0;
    std::size_t classes = 0;
};

// Trains a fresh single linear layer on frozen embeddings from the train
// split and reports test-split accuracy. The model is const throughout.
ProbeResult linear_probe(const model::MovTModel<float>& frozen, const data::Dataset& ds,
                         const data::SplitIndices& split, std::uint64_t seed,
                         std::size_t epochs = 100, double lr = 1e-3);

}  // namespace movt::train
