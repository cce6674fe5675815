#include "movt/infer.hpp"

#include <algorithm>

#include "movt/csvio.hpp"
#include "movt/losses.hpp"

namespace movt::infer {

namespace {

void fill_track_batch(const data::Dataset& ds, const std::vector<std::size_t>& idx,
                      std::size_t lo, std::size_t hi, nn::Tensor<float>& vel,
                      nn::Tensor<float>& means) {
    const std::size_t stride_v = ds.tracks * ds.frames * 3;
    const std::size_t stride_m = ds.tracks * 2;
    for (std::size_t b = lo; b < hi; ++b) {
        const auto& v = ds.velocity[idx[b]];
        const auto& m = ds.means[idx[b]];
        std::copy(v.data.begin(), v.data.end(), vel.data.begin() + (b - lo) * stride_v);
        std::copy(m.data.begin(), m.data.end(), means.data.begin() + (b - lo) * stride_m);
    }
}

void fill_pixel_batch(const data::Dataset& ds, const std::vector<std::size_t>& idx,
                      std::size_t lo, std::size_t hi, nn::Tensor<float>& px) {
    const std::size_t stride = ds.frames * ds.image_h * ds.image_w * 3;
    for (std::size_t b = lo; b < hi; ++b) {
        const auto& p = ds.pixels[idx[b]];
        std::copy(p.data.begin(), p.data.end(), px.data.begin() + (b - lo) * stride);
    }
}

void store_outputs(const model::ModelOutput<float>& out, std::size_t lo, BatchOutputs& acc) {
    const std::size_t ow = out.output.shape[1], ew = out.embedding.shape[1];
    std::copy(out.output.data.begin(), out.output.data.end(),
              acc.outputs.data.begin() + lo * ow);
    std::copy(out.embedding.data.begin(), out.embedding.data.end(),
              acc.embeddings.data.begin() + lo * ew);
}

}  // namespace

BatchOutputs movt_infer(const model::MovTModel<float>& m, const data::Dataset& ds,
                        const std::vector<std::size_t>& idx, std::size_t batch) {
    if (idx.empty()) throw DataError("no samples selected for inference");
    BatchOutputs acc;
    acc.outputs = nn::Tensor<float>({idx.size(), m.config().head_out()});
    acc.embeddings = nn::Tensor<float>({idx.size(), m.config().token_dim()});
    for (std::size_t lo = 0; lo < idx.size(); lo += batch) {
        const std::size_t hi = std::min(idx.size(), lo + batch);
        nn::Tensor<float> vel({hi - lo, ds.tracks, ds.frames, 3});
        nn::Tensor<float> means({hi - lo, ds.tracks, 2});
        fill_track_batch(ds, idx, lo, hi, vel, means);
        store_outputs(m.forward(vel, means, nullptr, nullptr), lo, acc);
    }
    return acc;
}

BatchOutputs pixt_infer(const model::PixTModel<float>& m, const data::Dataset& ds,
                        const std::vector<std::size_t>& idx, std::size_t batch) {
    if (idx.empty()) throw DataError("no samples selected for inference");
    if (ds.pixels.empty()) throw DataError("dataset was loaded without frame volumes");
    BatchOutputs acc;
    acc.outputs = nn::Tensor<float>({idx.size(), m.config().head_out()});
    acc.embeddings = nn::Tensor<float>({idx.size(), m.config().token_dim()});
    for (std::size_t lo = 0; lo < idx.size(); lo += batch) {
        const std::size_t hi = std::min(idx.size(), lo + batch);
        nn::Tensor<float> px({hi - lo, ds.frames, ds.image_h, ds.image_w, 3});
        fill_pixel_batch(ds, idx, lo, hi, px);
        store_outputs(m.forward(px, nullptr, nullptr), lo, acc);
    }
    return acc;
}

std::vector<eval::PredictionRecord> records_from_outputs(const nn::Tensor<float>& outputs,
                                                         const data::Dataset& ds,
                                                         const std::vector<std::size_t>& idx) {
    if (ds.regression) throw DataError("prediction records need a classification dataset");
    if (outputs.shape[0] != idx.size())
        throw DataError("output row count does not match the selected samples");
    const std::size_t c = outputs.shape[1];
    std::vector<eval::PredictionRecord> records;
    records.reserve(idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i) {
        std::vector<double> logits(c);
        for (std::size_t j = 0; j < c; ++j)
            logits[j] = static_cast<double>(outputs.data[i * c + j]);
        records.push_back(
            eval::make_record(ds.ids[idx[i]], std::move(logits), ds.labels[idx[i]]));
    }
    return records;
}

fusion::LogitsTable logits_from_outputs(const nn::Tensor<float>& outputs,
                                        const data::Dataset& ds,
                                        const std::vector<std::size_t>& idx,
                                        std::string source, double gflops) {
    if (outputs.shape[0] != idx.size())
        throw DataError("output row count does not match the selected samples");
    const std::size_t c = outputs.shape[1];
    fusion::LogitsTable t;
    t.source = std::move(source);
    t.gflops = gflops;
    for (std::size_t i = 0; i < idx.size(); ++i) {
        t.ids.push_back(ds.ids[idx[i]]);
        std::vector<double> row(c);
        for (std::size_t j = 0; j < c; ++j)
            row[j] = static_cast<double>(outputs.data[i * c + j]);
        t.logits.push_back(std::move(row));
    }
    t.validate();
    return t;
}

void export_embeddings(const std::string& path, const nn::Tensor<float>& embeddings,
                       const data::Dataset& ds, const std::vector<std::size_t>& idx) {
    if (embeddings.shape[0] != idx.size())
        throw DataError("embedding row count does not match the selected samples");
    const std::size_t d = embeddings.shape[1];
    std::vector<std::string> header{"id", "label"};
    for (std::size_t j = 0; j < d; ++j) header.push_back("e" + std::to_string(j));
    std::vector<std::vector<std::string>> rows;
    rows.reserve(idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i) {
        std::vector<std::string> row{ds.ids[idx[i]],
                                     ds.regression ? std::string("-")
                                                   : std::to_string(ds.labels[idx[i]])};
        for (std::size_t j = 0; j < d; ++j)
            row.push_back(csvio::num9(static_cast<double>(embeddings.data[i * d + j])));
        rows.push_back(std::move(row));
    }
    csvio::save_rows(path, header, rows);
}

}  // namespace movt::infer
