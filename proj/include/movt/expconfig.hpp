#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "movt/common.hpp"
#include "movt/model.hpp"
#include "movt/synthgen.hpp"
#include "movt/train.hpp"

namespace movt::expcfg {

// Value lists for the sweep subcommand, one list per axis.
struct SweepSpec {
    std::vector<double> fractions = {1.0, 0.6, 0.4, 0.2, 0.1};
    std::vector<std::size_t> crops = {32, 16, 8};
    std::vector<std::size_t> track_counts = {60, 30, 12, 6};
    std::vector<std::uint64_t> seeds = {0, 1, 2};

    // Throws ConfigError on an empty list, a fraction outside (0, 1],
    // a crop below 2, or a track count of zero.
    void validate() const;
};

// One JSON document driving a whole experiment: generator, both model
// architectures, the training recipe, and sweep values. Every field has a
// default, so "{}" is a complete config.
struct ExperimentConfig {
    // Root of the derived-seed tree. Sections that take their own seed
    // (gen.seed, train.seed) default to streams derived from this value and
    // may be pinned explicitly per section.
    std::uint64_t seed = 0;
    synthgen::GenConfig gen;
    model::MovTConfig movt;
    model::PixTConfig pixt;
    train::TrainConfig train;
    SweepSpec sweep;

    void validate() const;
};

// Strict parse: the document must be a JSON object whose keys are drawn from
// {seed, gen, movt, pixt, train, sweep}; inside a section every key must name
// a known field of the matching type. Violations throw ConfigError carrying
// the offending "section.field" path. Absent fields keep their defaults;
// absent section seeds are derived from the top-level seed. The result is
// validated before return.
ExperimentConfig experiment_from_json_text(const std::string& text);

// Reads and parses path. Throws IoError when the file cannot be read.
ExperimentConfig load_experiment(const std::string& path);

// Fully resolved document: every field of every section, in schema order.
// Round-trips through experiment_from_json_text to an equal config.
std::string experiment_to_json(const ExperimentConfig& cfg);

}  // namespace movt::expcfg
