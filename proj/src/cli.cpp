#include "movt/cli.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "movt/checkpoint.hpp"
#include "movt/csvio.hpp"
#include "movt/dataset.hpp"
#include "movt/evalmetrics.hpp"
#include "movt/expconfig.hpp"
#include "movt/flops.hpp"
#include "movt/fusion.hpp"
#include "movt/infer.hpp"
#include "movt/manifest.hpp"
#include "movt/rng.hpp"
#include "movt/saliency.hpp"
#include "movt/synthgen.hpp"
#include "movt/train.hpp"

namespace movt::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Derived-seed streams hanging off the experiment root seed; gen and train
// own streams 1 and 2 (assigned in expconfig).
constexpr std::uint64_t kSubsampleStream = 3;
constexpr std::uint64_t kFractionStream = 4;

expcfg::ExperimentConfig load_cfg(const std::string& path) {
    if (path.empty()) return expcfg::experiment_from_json_text("{}");
    return expcfg::load_experiment(path);
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path);
    out << text;
    if (!out) throw IoError("short write to " + path);
}

std::string ensure_run_dir(const std::string& out) {
    if (out.empty()) throw ConfigError("--out must not be empty");
    fs::create_directories(out);
    return out;
}

std::vector<std::string> split_list(const std::string& csv) {
    std::vector<std::string> parts;
    std::string cur;
    for (const char c : csv) {
        if (c == ',') {
            parts.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    parts.push_back(cur);
    return parts;
}

std::vector<double> parse_double_list(const std::string& csv, const std::string& flag) {
    std::vector<double> out;
    for (const auto& p : split_list(csv)) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(p, &used));
            if (used != p.size()) throw std::invalid_argument(p);
        } catch (const std::exception&) {
            throw ConfigError(flag + ": '" + p + "' is not a number");
        }
    }
    return out;
}

std::vector<std::size_t> parse_size_list(const std::string& csv, const std::string& flag) {
    std::vector<std::size_t> out;
    for (const double v : parse_double_list(csv, flag)) {
        if (v < 0 || v != static_cast<double>(static_cast<std::size_t>(v)))
            throw ConfigError(flag + ": values must be non-negative integers");
        out.push_back(static_cast<std::size_t>(v));
    }
    return out;
}

std::string detect_arch(const std::string& config_json) {
    json j;
    try {
        j = json::parse(config_json);
    } catch (const json::parse_error& e) {
        throw DataError("checkpoint config is not valid JSON: " + std::string(e.what()));
    }
    return j.value("arch", std::string("movt"));
}

// Resolved settings + provenance written to every run directory.
void write_run_config(const std::string& run_dir, const char* command,
                      const expcfg::ExperimentConfig& cfg, json extra) {
    extra["command"] = command;
    extra["experiment"] = json::parse(expcfg::experiment_to_json(cfg));
    write_text(run_dir + "/config.json", extra.dump(2));
}

void write_epochs_csv(const std::string& path, const train::TrainReport& report) {
    std::vector<std::vector<std::string>> rows;
    for (const auto& e : report.epochs) {
        rows.push_back({std::to_string(e.epoch), csvio::num9(e.train_loss),
                        csvio::num9(e.val_loss), csvio::num9(e.val_metric), csvio::num9(e.lr)});
    }
    csvio::save_rows(path, {"epoch", "train_loss", "val_loss", "val_metric", "lr"}, rows);
}

const std::vector<std::size_t>& pick_split(const data::SplitIndices& split,
                                           const std::string& name) {
    switch (trackio::parse_split(name)) {
        case trackio::Split::train: return split.train;
        case trackio::Split::val: return split.val;
        case trackio::Split::test: return split.test;
    }
    throw ConfigError("unknown split: " + name);
}

// ---------------------------------------------------------------------------
// gen

struct GenArgs {
    std::string config, out;
    std::int64_t seed = -1;
};

void cmd_gen(const GenArgs& a) {
    expcfg::ExperimentConfig cfg = load_cfg(a.config);
    if (a.seed >= 0) cfg.gen.seed = static_cast<std::uint64_t>(a.seed);
    const std::string out = ensure_run_dir(a.out);
    const synthgen::GenSummary s = synthgen::generate_dataset(cfg.gen, out);
    write_run_config(out, "gen", cfg, json::object());
    json j;
    j["samples"] = s.samples;
    j["classes"] = s.classes;
    j["train"] = s.train;
    j["val"] = s.val;
    j["test"] = s.test;
    j["manifest"] = s.manifest_path;
    std::cout << j.dump(2) << "\n";
}

// ---------------------------------------------------------------------------
// train

struct TrainArgs {
    std::string model = "movt";
    std::string data, out, config;
    double fraction = 1.0;
    std::size_t crop = 0;
    std::size_t tracks = 0;
    std::int64_t seed = -1;
    std::int64_t epochs = -1;
};

// Sizes the architecture to the loaded data; the config keeps every other
// knob. Classification heads take their class count from the dataset.
model::MovTConfig fit_movt(model::MovTConfig cfg, const data::Dataset& ds) {
    if (ds.regression) {
        cfg.head = model::HeadKind::regression;
        cfg.output_dim = ds.targets.empty() ? 1 : ds.targets.front().size();
    } else {
        cfg.head = model::HeadKind::classification;
        cfg.classes = ds.classes;
    }
    cfg.expected_frames = ds.frames;
    cfg.expected_tracks = ds.tracks;
    cfg.validate();
    return cfg;
}

model::PixTConfig fit_pixt(model::PixTConfig cfg, const data::Dataset& ds) {
    if (ds.regression) {
        cfg.head = model::HeadKind::regression;
        cfg.output_dim = ds.targets.empty() ? 1 : ds.targets.front().size();
    } else {
        cfg.head = model::HeadKind::classification;
        cfg.classes = ds.classes;
    }
    cfg.image_h = ds.image_h;
    cfg.image_w = ds.image_w;
    cfg.expected_frames = ds.frames;
    cfg.validate();
    return cfg;
}

void cmd_train(const TrainArgs& a) {
    if (a.model != "movt" && a.model != "pixt")
        throw ConfigError("--model must be movt or pixt");
    expcfg::ExperimentConfig cfg = load_cfg(a.config);
    if (a.seed >= 0) cfg.train.seed = static_cast<std::uint64_t>(a.seed);
    if (a.epochs >= 0) cfg.train.epochs = static_cast<std::size_t>(a.epochs);
    if (a.fraction <= 0 || a.fraction > 1) throw ConfigError("--fraction must be in (0, 1]");

    const std::string out = ensure_run_dir(a.out);
    data::LoadOptions opt;
    opt.with_frames = a.model == "pixt";
    opt.crop_frames = a.crop;
    opt.keep_tracks = a.tracks;
    opt.subsample_seed = Rng(cfg.seed).derive(kSubsampleStream).state();
    const data::Dataset ds = data::load_dataset(a.data, opt);
    data::SplitIndices split = data::make_splits(ds, cfg.seed);
    split.train = data::reduce_training_set(ds, split.train, a.fraction,
                                            Rng(cfg.seed).derive(kFractionStream).state());

    cfg.train.run_dir = out;
    train::TrainReport report;
    if (a.model == "movt") {
        model::MovTModel<float> m(fit_movt(cfg.movt, ds));
        m.init(cfg.train.seed);
        report = train::train_movt(m, ds, split, cfg.train);
    } else {
        model::PixTModel<float> m(fit_pixt(cfg.pixt, ds));
        m.init(cfg.train.seed);
        report = train::train_pixt(m, ds, split, cfg.train);
    }

    json extra;
    extra["model"] = a.model;
    extra["data"] = a.data;
    extra["dataset_fingerprint"] = data::dataset_fingerprint(a.data);
    extra["fraction"] = a.fraction;
    extra["crop"] = a.crop;
    extra["tracks"] = a.tracks;
    write_run_config(out, "train", cfg, extra);
    const std::string report_json = train::train_report_to_json(report);
    write_text(out + "/report.json", report_json);
    write_epochs_csv(out + "/epochs.csv", report);
    std::cout << report_json << "\n";
}

// ---------------------------------------------------------------------------
// eval

struct EvalArgs {
    std::string checkpoint, data, out;
    std::string split = "test";
    std::string coverage;  // comma list of thresholds
    bool export_embeddings = false;
    std::size_t crop = 0;
    std::size_t tracks = 0;
    std::int64_t seed = 0;
    std::size_t batch = 0;  // 0 = per-arch default
};

void cmd_eval(const EvalArgs& a) {
    const std::string config_json = model::checkpoint_config_json(a.checkpoint);
    const std::string arch = detect_arch(config_json);
    const std::string out = ensure_run_dir(a.out);

    data::LoadOptions opt;
    opt.with_frames = arch == "pixt";
    opt.crop_frames = a.crop;
    opt.keep_tracks = a.tracks;
    opt.subsample_seed = Rng(static_cast<std::uint64_t>(a.seed)).derive(kSubsampleStream).state();
    const data::Dataset ds = data::load_dataset(a.data, opt);
    if (ds.regression) throw ConfigError("eval requires a classification dataset");
    const data::SplitIndices split = data::make_splits(ds, static_cast<std::uint64_t>(a.seed));
    const std::vector<std::size_t>& idx = pick_split(split, a.split);

    infer::BatchOutputs outputs;
    double gflops = 0;
    if (arch == "movt") {
        model::MovTModel<float> m(model::movt_config_from_json_text(config_json));
        model::load_checkpoint(m, a.checkpoint);
        outputs = infer::movt_infer(m, ds, idx, a.batch ? a.batch : 64);
        gflops = model::count_gflops(m.config(), ds.tracks, ds.frames);
    } else if (arch == "pixt") {
        model::PixTModel<float> m(model::pixt_config_from_json_text(config_json));
        model::load_checkpoint(m, a.checkpoint);
        outputs = infer::pixt_infer(m, ds, idx, a.batch ? a.batch : 8);
        gflops = model::count_gflops(m.config(), ds.frames);
    } else {
        throw DataError("checkpoint declares unknown arch: " + arch);
    }

    const auto records = infer::records_from_outputs(outputs.outputs, ds, idx);
    const double top1 = eval::top1_accuracy(records);
    std::vector<std::size_t> absent;
    const auto per_class = eval::per_class_accuracy(records, ds.classes, &absent);
    eval::save_per_class_csv(out + "/per_class.csv", per_class);
    fusion::save_logits_csv(infer::logits_from_outputs(outputs.outputs, ds, idx, arch, gflops),
                            out + "/logits.csv");
    if (!a.coverage.empty()) {
        const auto points = eval::coverage_curve(
            records, parse_double_list(a.coverage, "--coverage-thresholds"));
        eval::save_coverage_csv(out + "/coverage.csv", points);
    }
    if (a.export_embeddings)
        infer::export_embeddings(out + "/embeddings.csv", outputs.embeddings, ds, idx);

    json extra;
    extra["checkpoint"] = a.checkpoint;
    extra["model_config"] = json::parse(config_json);
    extra["data"] = a.data;
    extra["dataset_fingerprint"] = data::dataset_fingerprint(a.data);
    extra["split"] = a.split;
    write_text(out + "/config.json", extra.dump(2));

    json r;
    r["arch"] = arch;
    r["split"] = a.split;
    r["count"] = idx.size();
    r["top1"] = top1;
    r["gflops"] = gflops;
    r["absent_classes"] = absent;
    write_text(out + "/report.json", r.dump(2));
    std::cout << r.dump(2) << "\n";
}

// ---------------------------------------------------------------------------
// sweep

struct SweepArgs {
    std::string axis;  // fraction | tracks | crop
    std::string data, out, config;
    std::string models = "movt";
    std::string values;  // comma list; empty = config defaults for the axis
};

struct SweepRow {
    std::string model;
    double value = 0;
    std::uint64_t seed = 0;
    double accuracy = 0;
    double best_val_loss = 0;
    std::size_t best_epoch = 0;
};

SweepRow sweep_point(const expcfg::ExperimentConfig& cfg, const std::string& model,
                     const std::string& axis, double value, std::uint64_t seed,
                     const std::string& manifest) {
    data::LoadOptions opt;
    opt.with_frames = model == "pixt";
    if (axis == "crop") opt.crop_frames = static_cast<std::size_t>(value);
    if (axis == "tracks") opt.keep_tracks = static_cast<std::size_t>(value);
    opt.subsample_seed = Rng(seed).derive(kSubsampleStream).state();
    const data::Dataset ds = data::load_dataset(manifest, opt);
    data::SplitIndices split = data::make_splits(ds, seed);
    if (axis == "fraction")
        split.train = data::reduce_training_set(ds, split.train, value,
                                                Rng(seed).derive(kFractionStream).state());

    train::TrainConfig tc = cfg.train;
    tc.seed = seed;
    tc.run_dir.clear();
    train::TrainReport report;
    std::vector<std::size_t> test_idx = split.test;
    std::vector<eval::PredictionRecord> records;
    if (model == "movt") {
        model::MovTModel<float> m(fit_movt(cfg.movt, ds));
        m.init(seed);
        report = train::train_movt(m, ds, split, tc);
        const auto outputs = infer::movt_infer(m, ds, test_idx);
        records = infer::records_from_outputs(outputs.outputs, ds, test_idx);
    } else {
        model::PixTModel<float> m(fit_pixt(cfg.pixt, ds));
        m.init(seed);
        report = train::train_pixt(m, ds, split, tc);
        const auto outputs = infer::pixt_infer(m, ds, test_idx);
        records = infer::records_from_outputs(outputs.outputs, ds, test_idx);
    }
    SweepRow row;
    row.model = model;
    row.value = value;
    row.seed = seed;
    row.accuracy = eval::top1_accuracy(records);
    row.best_val_loss = report.best_val_loss;
    row.best_epoch = report.best_epoch;
    return row;
}

void cmd_sweep(const SweepArgs& a) {
    if (a.axis != "fraction" && a.axis != "tracks" && a.axis != "crop")
        throw ConfigError("--axis must be fraction, tracks, or crop");
    const expcfg::ExperimentConfig cfg = load_cfg(a.config);
    std::vector<std::string> models = split_list(a.models);
    for (const auto& m : models) {
        if (m != "movt" && m != "pixt") throw ConfigError("--models entries must be movt or pixt");
    }

    std::vector<double> values;
    if (!a.values.empty()) {
        values = parse_double_list(a.values, "--values");
    } else if (a.axis == "fraction") {
        values = cfg.sweep.fractions;
    } else if (a.axis == "tracks") {
        for (const auto v : cfg.sweep.track_counts) values.push_back(static_cast<double>(v));
    } else {
        for (const auto v : cfg.sweep.crops) values.push_back(static_cast<double>(v));
    }
    if (a.axis == "fraction") {
        for (const double v : values) {
            if (!(v > 0) || v > 1) throw ConfigError("--values: fractions must be in (0, 1]");
        }
    } else {
        for (const double v : values) {
            if (v < 1 || v != static_cast<double>(static_cast<std::size_t>(v)))
                throw ConfigError("--values: " + a.axis + " values must be positive integers");
        }
    }

    const std::string out = ensure_run_dir(a.out);
    std::vector<SweepRow> rows;
    for (const auto& m : models) {
        for (const double v : values) {
            for (const std::uint64_t s : cfg.sweep.seeds) {
                rows.push_back(sweep_point(cfg, m, a.axis, v, s, a.data));
                const SweepRow& r = rows.back();
                std::cout << a.axis << "=" << csvio::num9(r.value) << " model=" << r.model
                          << " seed=" << r.seed << " accuracy=" << csvio::num9(r.accuracy)
                          << "\n";
            }
        }
    }

    std::vector<std::vector<std::string>> csv_rows;
    for (const auto& r : rows) {
        csv_rows.push_back({a.axis, csvio::num9(r.value), r.model, std::to_string(r.seed),
                            csvio::num9(r.accuracy), csvio::num9(r.best_val_loss),
                            std::to_string(r.best_epoch)});
    }
    csvio::save_rows(out + "/sweep.csv",
                     {"axis", "value", "model", "seed", "accuracy", "best_val_loss", "best_epoch"},
                     csv_rows);

    json extra;
    extra["axis"] = a.axis;
    extra["models"] = models;
    extra["values"] = values;
    extra["data"] = a.data;
    extra["dataset_fingerprint"] = data::dataset_fingerprint(a.data);
    write_run_config(out, "sweep", cfg, extra);

    json r;
    r["axis"] = a.axis;
    r["rows"] = rows.size();
    json per;
    for (const auto& m : models) {
        json pts = json::array();
        for (const double v : values) {
            double sum = 0;
            std::size_t n = 0;
            for (const auto& row : rows) {
                if (row.model == m && row.value == v) {
                    sum += row.accuracy;
                    ++n;
                }
            }
            pts.push_back({{"value", v}, {"mean_accuracy", n ? sum / n : 0.0}});
        }
        per[m] = pts;
    }
    r["mean_by_value"] = per;
    write_text(out + "/report.json", r.dump(2));
}

// ---------------------------------------------------------------------------
// fuse

struct FuseArgs {
    std::string a, b, labels, out;
    double weight = 0.5;
    bool prob_space = false;
    double gflops_a = 0;
    double gflops_b = 0;
};

std::vector<std::pair<std::string, std::size_t>> load_labels_csv(const std::string& path) {
    const csvio::CsvTable t = csvio::load_rows(path);
    if (t.header != std::vector<std::string>{"id", "label"})
        throw DataError("labels csv must have header id,label: " + path);
    std::vector<std::pair<std::string, std::size_t>> labels;
    for (const auto& row : t.rows) {
        const long long v = csvio::parse_int(row[1], "label for " + row[0]);
        if (v < 0) throw DataError("negative label for " + row[0]);
        labels.emplace_back(row[0], static_cast<std::size_t>(v));
    }
    return labels;
}

void cmd_fuse(const FuseArgs& a) {
    fusion::LogitsTable ta = fusion::load_logits_csv(a.a, fs::path(a.a).stem().string());
    fusion::LogitsTable tb = fusion::load_logits_csv(a.b, fs::path(a.b).stem().string());
    ta.gflops = a.gflops_a;
    tb.gflops = a.gflops_b;
    const auto labels = load_labels_csv(a.labels);
    const fusion::FusionReport report =
        fusion::fuse_and_eval(ta, tb, labels, a.weight, a.prob_space);

    const std::string out = ensure_run_dir(a.out);
    const fusion::FuseOutcome outcome = fusion::late_fuse(ta, tb, a.weight, a.prob_space);
    fusion::save_logits_csv(outcome.fused, out + "/fused.csv");
    const std::string report_json = fusion::fusion_report_to_json(report);
    write_text(out + "/report.json", report_json);
    json extra;
    extra["command"] = "fuse";
    extra["a"] = a.a;
    extra["b"] = a.b;
    extra["labels"] = a.labels;
    extra["weight"] = a.weight;
    extra["prob_space"] = a.prob_space;
    write_text(out + "/config.json", extra.dump(2));
    std::cout << report_json << "\n";
}

// ---------------------------------------------------------------------------
// saliency

struct SaliencyArgs {
    std::string checkpoint, data, out;
    std::string split = "test";
    double fraction = 0.1;
    std::size_t bins = 10;
    bool grad_x_input = false;
    std::size_t limit = 0;  // 0 = all clips in the split
};

void cmd_saliency(const SaliencyArgs& a) {
    const std::string config_json = model::checkpoint_config_json(a.checkpoint);
    if (detect_arch(config_json) != "movt")
        throw ConfigError("saliency requires a track-model checkpoint");
    model::MovTModel<float> m(model::movt_config_from_json_text(config_json));
    model::load_checkpoint(m, a.checkpoint);

    const trackio::Split want = trackio::parse_split(a.split);
    const auto entries = trackio::load_manifest(a.data);
    const fs::path dir = fs::path(a.data).parent_path();
    std::vector<saliency::ImportanceScores> all;
    std::vector<std::vector<std::string>> topk_rows;
    for (const auto& e : entries) {
        if (e.split != want) continue;
        if (a.limit && all.size() >= a.limit) break;
        const trackio::PointTrackSet set = trackio::load_tracks((dir / e.file).string());
        if (set.label_kind != trackio::LabelKind::class_index)
            throw DataError("clip has no class label: " + e.file);
        all.push_back(saliency::track_importance(m, set, set.class_label, a.grad_x_input));
        const auto& scores = all.back();
        const auto top = saliency::topk_tracks(scores.scores, a.fraction);
        for (std::size_t rank = 0; rank < top.size(); ++rank) {
            topk_rows.push_back({scores.video_id, std::to_string(rank),
                                 std::to_string(top[rank]),
                                 csvio::num9(scores.scores[top[rank]])});
        }
    }
    if (all.empty()) throw DataError("no clips in split " + a.split);

    const std::string out = ensure_run_dir(a.out);
    saliency::save_scores_csv(out + "/scores.csv", all);
    const saliency::HistogramResult hist = saliency::importance_histogram(all, a.bins);
    saliency::save_histogram_csv(out + "/histogram.csv", hist);
    csvio::save_rows(out + "/topk.csv", {"video_id", "rank", "track_index", "score"}, topk_rows);

    json extra;
    extra["command"] = "saliency";
    extra["checkpoint"] = a.checkpoint;
    extra["data"] = a.data;
    extra["split"] = a.split;
    extra["fraction"] = a.fraction;
    extra["bins"] = a.bins;
    extra["grad_x_input"] = a.grad_x_input;
    write_text(out + "/config.json", extra.dump(2));
    json r;
    r["clips"] = all.size();
    r["tracks_per_clip"] = all.front().scores.size();
    r["mean_above_half"] = hist.mean_above_half;
    write_text(out + "/report.json", r.dump(2));
    std::cout << r.dump(2) << "\n";
}

// ---------------------------------------------------------------------------
// flops

struct FlopsArgs {
    std::string arch = "movt";
    std::string config, out;
    std::size_t tracks = 0;
    std::size_t frames = 0;
};

void cmd_flops(const FlopsArgs& a) {
    const expcfg::ExperimentConfig cfg = load_cfg(a.config);
    model::ComputeReport report;
    if (a.arch == "movt") {
        report = model::movt_compute(cfg.movt, a.tracks ? a.tracks : cfg.movt.expected_tracks,
                                     a.frames ? a.frames : cfg.movt.expected_frames);
    } else if (a.arch == "pixt") {
        report = model::pixt_compute(cfg.pixt, a.frames ? a.frames : cfg.pixt.expected_frames);
    } else {
        throw ConfigError("--arch must be movt or pixt");
    }

    json r;
    r["arch"] = a.arch;
    json rows = json::array();
    for (const auto& row : report.rows)
        rows.push_back({{"name", row.name}, {"params", row.params}, {"flops", row.flops}});
    r["rows"] = rows;
    r["total_params"] = report.total_params;
    r["total_flops"] = report.total_flops;
    r["gflops"] = report.gflops();
    if (!a.out.empty()) {
        const std::string out = ensure_run_dir(a.out);
        write_text(out + "/report.json", r.dump(2));
        std::vector<std::vector<std::string>> csv_rows;
        for (const auto& row : report.rows)
            csv_rows.push_back({row.name, std::to_string(row.params), std::to_string(row.flops)});
        csvio::save_rows(out + "/ledger.csv", {"name", "params", "flops"}, csv_rows);
        write_run_config(out, "flops", cfg, json::object());
    }
    std::cout << r.dump(2) << "\n";
}

// ---------------------------------------------------------------------------
// probe

struct ProbeArgs {
    std::string checkpoint, data, out;
    std::int64_t seed = 0;
    std::size_t epochs = 100;
    double lr = 1e-3;
    std::size_t crop = 0;
    std::size_t tracks = 0;
};

void cmd_probe(const ProbeArgs& a) {
    const std::string config_json = model::checkpoint_config_json(a.checkpoint);
    if (detect_arch(config_json) != "movt")
        throw ConfigError("probe requires a track-model checkpoint");
    model::MovTModel<float> m(model::movt_config_from_json_text(config_json));
    model::load_checkpoint(m, a.checkpoint);

    data::LoadOptions opt;
    opt.crop_frames = a.crop;
    opt.keep_tracks = a.tracks;
    opt.subsample_seed = Rng(static_cast<std::uint64_t>(a.seed)).derive(kSubsampleStream).state();
    const data::Dataset ds = data::load_dataset(a.data, opt);
    const data::SplitIndices split = data::make_splits(ds, static_cast<std::uint64_t>(a.seed));
    const train::ProbeResult result =
        train::linear_probe(m, ds, split, static_cast<std::uint64_t>(a.seed), a.epochs, a.lr);

    json r;
    r["accuracy"] = result.accuracy;
    r["embed_dim"] = result.embed_dim;
    r["classes"] = result.classes;
    if (!a.out.empty()) {
        const std::string out = ensure_run_dir(a.out);
        write_text(out + "/report.json", r.dump(2));
        json extra;
        extra["command"] = "probe";
        extra["checkpoint"] = a.checkpoint;
        extra["data"] = a.data;
        extra["dataset_fingerprint"] = data::dataset_fingerprint(a.data);
        extra["seed"] = a.seed;
        extra["epochs"] = a.epochs;
        extra["lr"] = a.lr;
        write_text(out + "/config.json", extra.dump(2));
    }
    std::cout << r.dump(2) << "\n";
}

// ---------------------------------------------------------------------------

int run_impl(int argc, const char* const* argv) {
    CLI::App app{"Long-term motion representation toolkit"};
    app.require_subcommand(1);

    GenArgs gen;
    auto* sc_gen = app.add_subcommand("gen", "Generate a synthetic point-track dataset");
    sc_gen->add_option("--config", gen.config, "Experiment config JSON");
    sc_gen->add_option("--out", gen.out, "Dataset output directory")->required();
    sc_gen->add_option("--seed", gen.seed, "Override the generator seed");
    sc_gen->callback([&] { cmd_gen(gen); });

    TrainArgs tr;
    auto* sc_train = app.add_subcommand("train", "Train a model and save the best checkpoint");
    sc_train->add_option("--model", tr.model, "movt or pixt");
    sc_train->add_option("--data", tr.data, "Path to manifest.json")->required();
    sc_train->add_option("--out", tr.out, "Run directory")->required();
    sc_train->add_option("--config", tr.config, "Experiment config JSON");
    sc_train->add_option("--fraction", tr.fraction, "Training-set fraction in (0, 1]");
    sc_train->add_option("--crop", tr.crop, "Center-crop clips to this many frames");
    sc_train->add_option("--tracks", tr.tracks, "Subsample each clip to this many tracks");
    sc_train->add_option("--seed", tr.seed, "Override the training seed");
    sc_train->add_option("--epochs", tr.epochs, "Override the epoch count");
    sc_train->callback([&] { cmd_train(tr); });

    EvalArgs ev;
    auto* sc_eval = app.add_subcommand("eval", "Evaluate a checkpoint on a dataset split");
    sc_eval->add_option("--checkpoint", ev.checkpoint, "Model checkpoint")->required();
    sc_eval->add_option("--data", ev.data, "Path to manifest.json")->required();
    sc_eval->add_option("--out", ev.out, "Run directory")->required();
    sc_eval->add_option("--split", ev.split, "train, val, or test");
    sc_eval->add_option("--coverage-thresholds", ev.coverage, "Comma list for the coverage curve");
    sc_eval->add_flag("--export-embeddings", ev.export_embeddings, "Also write embeddings.csv");
    sc_eval->add_option("--crop", ev.crop, "Center-crop clips to this many frames");
    sc_eval->add_option("--tracks", ev.tracks, "Subsample each clip to this many tracks");
    sc_eval->add_option("--seed", ev.seed, "Split-carving and subsampling seed");
    sc_eval->add_option("--batch", ev.batch, "Inference batch size");
    sc_eval->callback([&] { cmd_eval(ev); });

    SweepArgs sw;
    auto* sc_sweep = app.add_subcommand("sweep", "Retrain across one axis and tabulate accuracy");
    sc_sweep->add_option("--axis", sw.axis, "fraction, tracks, or crop")->required();
    sc_sweep->add_option("--data", sw.data, "Path to manifest.json")->required();
    sc_sweep->add_option("--out", sw.out, "Run directory")->required();
    sc_sweep->add_option("--config", sw.config, "Experiment config JSON");
    sc_sweep->add_option("--models", sw.models, "Comma list of movt,pixt (default movt)");
    sc_sweep->add_option("--values", sw.values, "Comma list of axis values");
    sc_sweep->callback([&] { cmd_sweep(sw); });

    FuseArgs fu;
    auto* sc_fuse = app.add_subcommand("fuse", "Late-fuse two logit tables and score them");
    sc_fuse->add_option("--a", fu.a, "Branch A logits CSV")->required();
    sc_fuse->add_option("--b", fu.b, "Branch B logits CSV")->required();
    sc_fuse->add_option("--labels", fu.labels, "CSV with header id,label")->required();
    sc_fuse->add_option("--out", fu.out, "Run directory")->required();
    sc_fuse->add_option("--weight", fu.weight, "Weight on branch A in [0, 1]");
    sc_fuse->add_flag("--prob-space", fu.prob_space, "Fuse softmax probabilities, not logits");
    sc_fuse->add_option("--gflops-a", fu.gflops_a, "Compute annotation for branch A");
    sc_fuse->add_option("--gflops-b", fu.gflops_b, "Compute annotation for branch B");
    sc_fuse->callback([&] { cmd_fuse(fu); });

    SaliencyArgs sa;
    auto* sc_sal = app.add_subcommand("saliency", "Score per-track importance for a split");
    sc_sal->add_option("--checkpoint", sa.checkpoint, "Track-model checkpoint")->required();
    sc_sal->add_option("--data", sa.data, "Path to manifest.json")->required();
    sc_sal->add_option("--out", sa.out, "Run directory")->required();
    sc_sal->add_option("--split", sa.split, "train, val, or test");
    sc_sal->add_option("--fraction", sa.fraction, "Top fraction kept in topk.csv");
    sc_sal->add_option("--bins", sa.bins, "Histogram bin count");
    sc_sal->add_flag("--grad-x-input", sa.grad_x_input, "Weight gradients by the input");
    sc_sal->add_option("--limit", sa.limit, "Stop after this many clips (0 = all)");
    sc_sal->callback([&] { cmd_saliency(sa); });

    FlopsArgs fl;
    auto* sc_flops = app.add_subcommand("flops", "Print the analytic parameter and FLOP ledger");
    sc_flops->add_option("--arch", fl.arch, "movt or pixt");
    sc_flops->add_option("--config", fl.config, "Experiment config JSON");
    sc_flops->add_option("--tracks", fl.tracks, "Tracks per clip (movt)");
    sc_flops->add_option("--frames", fl.frames, "Frames per clip");
    sc_flops->add_option("--out", fl.out, "Optional run directory");
    sc_flops->callback([&] { cmd_flops(fl); });

    ProbeArgs pr;
    auto* sc_probe = app.add_subcommand("probe", "Linear-probe frozen embeddings on a dataset");
    sc_probe->add_option("--checkpoint", pr.checkpoint, "Track-model checkpoint")->required();
    sc_probe->add_option("--data", pr.data, "Path to manifest.json")->required();
    sc_probe->add_option("--out", pr.out, "Optional run directory");
    sc_probe->add_option("--seed", pr.seed, "Probe seed");
    sc_probe->add_option("--epochs", pr.epochs, "Probe epochs");
    sc_probe->add_option("--lr", pr.lr, "Probe learning rate");
    sc_probe->add_option("--crop", pr.crop, "Center-crop clips to this many frames");
    sc_probe->add_option("--tracks", pr.tracks, "Subsample each clip to this many tracks");
    sc_probe->callback([&] { cmd_probe(pr); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 3;
    } catch (const IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return 3;
    } catch (const NumericFault& e) {
        std::cerr << "numeric fault: " << e.what() << "\n";
        return 4;
    }
    return 0;
}

}  // namespace

int run(int argc, const char* const* argv) { return run_impl(argc, argv); }

int run(const std::vector<std::string>& args) {
    std::vector<std::string> argv_store;
    argv_store.reserve(args.size() + 1);
    argv_store.push_back("movt");
    for (const auto& a : args) argv_store.push_back(a);
    std::vector<const char*> argv;
    for (const auto& a : argv_store) argv.push_back(a.c_str());
    return run_impl(static_cast<int>(argv.size()), argv.data());
}

}  // namespace movt::cli
