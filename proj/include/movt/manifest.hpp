#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "movt/trackio.hpp"

namespace movt::trackio {

enum class Split { train, val, test };

const char* split_name(Split s);
Split parse_split(const std::string& s);

// One dataset sample: a .ptrk file (relative to the manifest's directory),
// its split, its label, and an optional video grouping key for multi-clip
// videos.
struct ManifestEntry {
    std::string file;
    Split split = Split::train;
    LabelKind label_kind = LabelKind::none;
    std::uint32_t class_label = 0;
    std::vector<float> regression_label;
    std::string video_id;  // empty = each clip is its own video
};

std::vector<ManifestEntry> load_manifest(const std::string& path);
void save_manifest(const std::string& path, const std::vector<ManifestEntry>& entries);

}  // namespace movt::trackio
