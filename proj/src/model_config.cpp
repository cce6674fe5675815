#include "movt/model.hpp"

#include <nlohmann/json.hpp>

namespace movt::model {

using nlohmann::json;

namespace {

void validate_shared(std::size_t embed_dim, std::size_t conv_kernel, std::size_t layers,
                     std::size_t heads, std::size_t ff_expansion, std::size_t mlp_depth,
                     double dropout, HeadKind head, std::size_t classes, std::size_t output_dim) {
    if (embed_dim == 0) throw ConfigError("embed_dim must be positive");
    if (conv_kernel == 0 || conv_kernel % 2 == 0)
        throw ConfigError("conv_kernel must be odd and positive");
    if (layers == 0) throw ConfigError("transformer layer count must be >= 1");
    if (heads == 0) throw ConfigError("head count must be >= 1");
    if ((2 * embed_dim) % heads != 0)
        throw ConfigError("transformer dimension (2 * embed_dim) must be divisible by heads");
    if (ff_expansion == 0) throw ConfigError("ff_expansion must be >= 1");
    if (mlp_depth == 0) throw ConfigError("mlp_depth must be >= 1");
    if (dropout < 0 || dropout >= 1) throw ConfigError("dropout must be in [0, 1)");
    if (head == HeadKind::classification && classes < 2)
        throw ConfigError("classification needs at least 2 classes");
    if (head == HeadKind::regression && output_dim < 1)
        throw ConfigError("regression needs output_dim >= 1");
}

const char* head_name(HeadKind h) {
    return h == HeadKind::classification ? "classification" : "regression";
}

HeadKind parse_head(const std::string& s) {
    if (s == "classification") return HeadKind::classification;
    if (s == "regression") return HeadKind::regression;
    throw ConfigError("unknown head kind: " + s);
}

template <typename V>
V get_or(const json& j, const char* key, V fallback) {
    if (!j.contains(key)) return fallback;
    return j.at(key).get<V>();
}

json shared_to_json(const char* arch, std::size_t embed_dim, std::size_t conv_kernel,
                    std::size_t layers, std::size_t heads, std::size_t ff_expansion,
                    std::size_t mlp_depth, double dropout, HeadKind head, std::size_t classes,
                    std::size_t output_dim, std::size_t expected_frames) {
    json j;
    j["arch"] = arch;
    j["embed_dim"] = embed_dim;
    j["conv_kernel"] = conv_kernel;
    j["layers"] = layers;
    j["heads"] = heads;
    j["ff_expansion"] = ff_expansion;
    j["mlp_depth"] = mlp_depth;
    j["dropout"] = dropout;
    j["head"] = head_name(head);
    if (head == HeadKind::classification) {
        j["classes"] = classes;
    } else {
        j["output_dim"] = output_dim;
    }
    j["expected_frames"] = expected_frames;
    return j;
}

}  // namespace

void MovTConfig::validate() const {
    validate_shared(embed_dim, conv_kernel, layers, heads, ff_expansion, mlp_depth, dropout,
                    head, classes, output_dim);
    if (expected_frames < 2) throw ConfigError("expected_frames must be >= 2");
    if (expected_tracks < 1) throw ConfigError("expected_tracks must be >= 1");
}

void PixTConfig::validate() const {
    validate_shared(embed_dim, conv_kernel, layers, heads, ff_expansion, mlp_depth, dropout,
                    head, classes, output_dim);
    if (patch == 0) throw ConfigError("patch size must be positive");
    if (image_h == 0 || image_w == 0) throw ConfigError("image extents must be positive");
    if (image_h % patch != 0 || image_w % patch != 0)
        throw ConfigError("image extents must be divisible by patch size");
    if (expected_frames < 2) throw ConfigError("expected_frames must be >= 2");
}

std::string movt_config_to_json(const MovTConfig& cfg) {
    json j = shared_to_json("movt", cfg.embed_dim, cfg.conv_kernel, cfg.layers, cfg.heads,
                            cfg.ff_expansion, cfg.mlp_depth, cfg.dropout, cfg.head, cfg.classes,
                            cfg.output_dim, cfg.expected_frames);
    j["expected_tracks"] = cfg.expected_tracks;
    return j.dump();
}

MovTConfig movt_config_from_json_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError("model config is not valid JSON: " + std::string(e.what()));
    }
    if (get_or<std::string>(j, "arch", "movt") != "movt")
        throw ConfigError("config arch is not 'movt'");
    MovTConfig cfg;
    cfg.embed_dim = get_or<std::size_t>(j, "embed_dim", cfg.embed_dim);
    cfg.conv_kernel = get_or<std::size_t>(j, "conv_kernel", cfg.conv_kernel);
    cfg.layers = get_or<std::size_t>(j, "layers", cfg.layers);
    cfg.heads = get_or<std::size_t>(j, "heads", cfg.heads);
    cfg.ff_expansion = get_or<std::size_t>(j, "ff_expansion", cfg.ff_expansion);
    cfg.mlp_depth = get_or<std::size_t>(j, "mlp_depth", cfg.mlp_depth);
    cfg.dropout = get_or<double>(j, "dropout", cfg.dropout);
    cfg.head = parse_head(get_or<std::string>(j, "head", "classification"));
    cfg.classes = get_or<std::size_t>(j, "classes", cfg.classes);
    cfg.output_dim = get_or<std::size_t>(j, "output_dim", cfg.output_dim);
    cfg.expected_frames = get_or<std::size_t>(j, "expected_frames", cfg.expected_frames);
    cfg.expected_tracks = get_or<std::size_t>(j, "expected_tracks", cfg.expected_tracks);
    cfg.validate();
    return cfg;
}

std::string pixt_config_to_json(const PixTConfig& cfg) {
    json j = shared_to_json("pixt", cfg.embed_dim, cfg.conv_kernel, cfg.layers, cfg.heads,
                            cfg.ff_expansion, cfg.mlp_depth, cfg.dropout, cfg.head, cfg.classes,
                            cfg.output_dim, cfg.expected_frames);
    j["image_h"] = cfg.image_h;
    j["image_w"] = cfg.image_w;
    j["patch"] = cfg.patch;
    return j.dump();
}

PixTConfig pixt_config_from_json_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError("model config is not valid JSON: " + std::string(e.what()));
    }
    if (get_or<std::string>(j, "arch", "pixt") != "pixt")
        throw ConfigError("config arch is not 'pixt'");
    PixTConfig cfg;
    cfg.image_h = get_or<std::size_t>(j, "image_h", cfg.image_h);
    cfg.image_w = get_or<std::size_t>(j, "image_w", cfg.image_w);
    cfg.patch = get_or<std::size_t>(j, "patch", cfg.patch);
    cfg.embed_dim = get_or<std::size_t>(j, "embed_dim", cfg.embed_dim);
    cfg.conv_kernel = get_or<std::size_t>(j, "conv_kernel", cfg.conv_kernel);
    cfg.layers = get_or<std::size_t>(j, "layers", cfg.layers);
    cfg.heads = get_or<std::size_t>(j, "heads", cfg.heads);
    cfg.ff_expansion = get_or<std::size_t>(j, "ff_expansion", cfg.ff_expansion);
    cfg.mlp_depth = get_or<std::size_t>(j, "mlp_depth", cfg.mlp_depth);
    cfg.dropout = get_or<double>(j, "dropout", cfg.dropout);
    cfg.head = parse_head(get_or<std::string>(j, "head", "classification"));
    cfg.classes = get_or<std::size_t>(j, "classes", cfg.classes);
    cfg.output_dim = get_or<std::size_t>(j, "output_dim", cfg.output_dim);
    cfg.expected_frames = get_or<std::size_t>(j, "expected_frames", cfg.expected_frames);
    cfg.validate();
    return cfg;
}

}  // namespace movt::model
