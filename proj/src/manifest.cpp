#include "movt/manifest.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

namespace movt::trackio {

using nlohmann::json;

const char* split_name(Split s) {
    switch (s) {
        case Split::train: return "train";
        case Split::val: return "val";
        case Split::test: return "test";
    }
    return "unknown";
}

Split parse_split(const std::string& s) {
    if (s == "train") return Split::train;
    if (s == "val") return Split::val;
    if (s == "test") return Split::test;
    throw DataError("unknown split name: " + s);
}

std::vector<ManifestEntry> load_manifest(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open manifest: " + path);
    json doc;
    try {
        f >> doc;
    } catch (const json::parse_error& e) {
        throw DataError("manifest is not valid JSON: " + std::string(e.what()));
    }
    if (!doc.is_array()) throw DataError("manifest root must be an array");
    std::vector<ManifestEntry> entries;
    entries.reserve(doc.size());
    for (const auto& item : doc) {
        if (!item.is_object() || !item.contains("file") || !item.contains("split"))
            throw DataError("manifest entry needs 'file' and 'split'");
        ManifestEntry e;
        e.file = item.at("file").get<std::string>();
        e.split = parse_split(item.at("split").get<std::string>());
        if (item.contains("label")) {
            const auto& label = item.at("label");
            if (label.is_number_unsigned() || label.is_number_integer()) {
                e.label_kind = LabelKind::class_index;
                e.class_label = label.get<std::uint32_t>();
            } else if (label.is_array()) {
                e.label_kind = LabelKind::regression;
                e.regression_label = label.get<std::vector<float>>();
            } else {
                throw DataError("manifest label must be an integer or an array");
            }
        }
        if (item.contains("video_id")) e.video_id = item.at("video_id").get<std::string>();
        entries.push_back(std::move(e));
    }
    return entries;
}

void save_manifest(const std::string& path, const std::vector<ManifestEntry>& entries) {
    json doc = json::array();
    for (const auto& e : entries) {
        json item;
        item["file"] = e.file;
        item["split"] = split_name(e.split);
        if (e.label_kind == LabelKind::class_index) {
            item["label"] = e.class_label;
        } else if (e.label_kind == LabelKind::regression) {
            item["label"] = e.regression_label;
        }
        if (!e.video_id.empty()) item["video_id"] = e.video_id;
        doc.push_back(std::move(item));
    }
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw IoError("cannot open manifest for writing: " + path);
    f << doc.dump(2) << "\n";
    if (!f) throw IoError("manifest write failed: " + path);
}

}  // namespace movt::trackio
