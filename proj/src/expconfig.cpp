#include "movt/expconfig.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "movt/rng.hpp"

namespace movt::expcfg {

using nlohmann::json;

namespace {

[[noreturn]] void bad_type(const std::string& path, const char* want) {
    throw ConfigError(path + ": expected " + want);
}

std::uint64_t get_u64(const json& v, const std::string& path) {
    if (!v.is_number_unsigned()) bad_type(path, "a non-negative integer");
    return v.get<std::uint64_t>();
}

std::size_t get_size(const json& v, const std::string& path) {
    return static_cast<std::size_t>(get_u64(v, path));
}

double get_num(const json& v, const std::string& path) {
    if (!v.is_number()) bad_type(path, "a number");
    return v.get<double>();
}

bool get_bool(const json& v, const std::string& path) {
    if (!v.is_boolean()) bad_type(path, "a boolean");
    return v.get<bool>();
}

std::string get_str(const json& v, const std::string& path) {
    if (!v.is_string()) bad_type(path, "a string");
    return v.get<std::string>();
}

const json& get_array(const json& v, const std::string& path) {
    if (!v.is_array()) bad_type(path, "an array");
    return v;
}

model::HeadKind get_head(const json& v, const std::string& path) {
    const std::string s = get_str(v, path);
    if (s == "classification") return model::HeadKind::classification;
    if (s == "regression") return model::HeadKind::regression;
    throw ConfigError(path + ": unknown head kind '" + s + "'");
}

void parse_gen(const json& j, synthgen::GenConfig* g, bool* saw_seed) {
    for (const auto& [key, v] : j.items()) {
        const std::string path = "gen." + key;
        if (key == "families") {
            g->families.clear();
            for (const auto& f : get_array(v, path)) g->families.push_back(get_str(f, path));
        } else if (key == "train_per_class") {
            g->train_per_class = get_size(v, path);
        } else if (key == "val_per_class") {
            g->val_per_class = get_size(v, path);
        } else if (key == "test_per_class") {
            g->test_per_class = get_size(v, path);
        } else if (key == "frames") {
            g->frames = get_size(v, path);
        } else if (key == "tracks") {
            g->tracks = get_size(v, path);
        } else if (key == "noise_sigma") {
            g->noise_sigma = get_num(v, path);
        } else if (key == "occlusion_rate") {
            g->occlusion_rate = get_num(v, path);
        } else if (key == "speed_jitter") {
            g->speed_jitter = get_num(v, path);
        } else if (key == "seed") {
            g->seed = get_u64(v, path);
            *saw_seed = true;
        } else if (key == "render") {
            g->render = get_bool(v, path);
        } else if (key == "image_h") {
            g->image_h = get_size(v, path);
        } else if (key == "image_w") {
            g->image_w = get_size(v, path);
        } else if (key == "blob_sigma") {
            g->blob_sigma = get_num(v, path);
        } else {
            throw ConfigError(path + ": unknown field");
        }
    }
}

void parse_movt(const json& j, model::MovTConfig* m) {
    for (const auto& [key, v] : j.items()) {
        const std::string path = "movt." + key;
        if (key == "embed_dim") {
            m->embed_dim = get_size(v, path);
        } else if (key == "conv_kernel") {
            m->conv_kernel = get_size(v, path);
        } else if (key == "layers") {
            m->layers = get_size(v, path);
        } else if (key == "heads") {
            m->heads = get_size(v, path);
        } else if (key == "ff_expansion") {
            m->ff_expansion = get_size(v, path);
        } else if (key == "mlp_depth") {
            m->mlp_depth = get_size(v, path);
        } else if (key == "dropout") {
            m->dropout = get_num(v, path);
        } else if (key == "head") {
            m->head = get_head(v, path);
        } else if (key == "classes") {
            m->classes = get_size(v, path);
        } else if (key == "output_dim") {
            m->output_dim = get_size(v, path);
        } else if (key == "expected_frames") {
            m->expected_frames = get_size(v, path);
        } else if (key == "expected_tracks") {
            m->expected_tracks = get_size(v, path);
        } else {
            throw ConfigError(path + ": unknown field");
        }
    }
}

void parse_pixt(const json& j, model::PixTConfig* p) {
    for (const auto& [key, v] : j.items()) {
        const std::string path = "pixt." + key;
        if (key == "image_h") {
            p->image_h = get_size(v, path);
        } else if (key == "image_w") {
            p->image_w = get_size(v, path);
        } else if (key == "patch") {
            p->patch = get_size(v, path);
        } else if (key == "embed_dim") {
            p->embed_dim = get_size(v, path);
        } else if (key == "conv_kernel") {
            p->conv_kernel = get_size(v, path);
        } else if (key == "layers") {
            p->layers = get_size(v, path);
        } else if (key == "heads") {
            p->heads = get_size(v, path);
        } else if (key == "ff_expansion") {
            p->ff_expansion = get_size(v, path);
        } else if (key == "mlp_depth") {
            p->mlp_depth = get_size(v, path);
        } else if (key == "dropout") {
            p->dropout = get_num(v, path);
        } else if (key == "head") {
            p->head = get_head(v, path);
        } else if (key == "classes") {
            p->classes = get_size(v, path);
        } else if (key == "output_dim") {
            p->output_dim = get_size(v, path);
        } else if (key == "expected_frames") {
            p->expected_frames = get_size(v, path);
        } else {
            throw ConfigError(path + ": unknown field");
        }
    }
}

void parse_train(const json& j, train::TrainConfig* t, bool* saw_seed) {
    for (const auto& [key, v] : j.items()) {
        const std::string path = "train." + key;
        if (key == "epochs") {
            t->epochs = get_size(v, path);
        } else if (key == "lr") {
            t->lr = get_num(v, path);
        } else if (key == "batch_size") {
            t->batch_size = get_size(v, path);
        } else if (key == "seed") {
            t->seed = get_u64(v, path);
            *saw_seed = true;
        } else if (key == "max_norm") {
            t->max_norm = get_num(v, path);
        } else if (key == "weight_decay") {
            t->weight_decay = get_num(v, path);
        } else if (key == "loss") {
            t->loss = train::parse_loss(get_str(v, path));
        } else if (key == "plateau_factor") {
            t->plateau.factor = get_num(v, path);
        } else if (key == "plateau_patience") {
            if (!v.is_number_integer()) bad_type(path, "an integer");
            t->plateau.patience = v.get<int>();
        } else if (key == "plateau_min_delta") {
            t->plateau.min_delta = get_num(v, path);
        } else if (key == "plateau_min_lr") {
            t->plateau.min_lr = get_num(v, path);
        } else {
            throw ConfigError(path + ": unknown field");
        }
    }
}

void parse_sweep(const json& j, SweepSpec* s) {
    for (const auto& [key, v] : j.items()) {
        const std::string path = "sweep." + key;
        if (key == "fractions") {
            s->fractions.clear();
            for (const auto& f : get_array(v, path)) s->fractions.push_back(get_num(f, path));
        } else if (key == "crops") {
            s->crops.clear();
            for (const auto& c : get_array(v, path)) s->crops.push_back(get_size(c, path));
        } else if (key == "track_counts") {
            s->track_counts.clear();
            for (const auto& n : get_array(v, path)) s->track_counts.push_back(get_size(n, path));
        } else if (key == "seeds") {
            s->seeds.clear();
            for (const auto& sd : get_array(v, path)) s->seeds.push_back(get_u64(sd, path));
        } else {
            throw ConfigError(path + ": unknown field");
        }
    }
}

}  // namespace

void SweepSpec::validate() const {
    if (fractions.empty()) throw ConfigError("sweep.fractions: must not be empty");
    for (const double f : fractions) {
        if (!(f > 0) || f > 1) throw ConfigError("sweep.fractions: values must be in (0, 1]");
    }
    if (crops.empty()) throw ConfigError("sweep.crops: must not be empty");
    for (const std::size_t c : crops) {
        if (c < 2) throw ConfigError("sweep.crops: values must be >= 2");
    }
    if (track_counts.empty()) throw ConfigError("sweep.track_counts: must not be empty");
    for (const std::size_t n : track_counts) {
        if (n == 0) throw ConfigError("sweep.track_counts: values must be >= 1");
    }
    if (seeds.empty()) throw ConfigError("sweep.seeds: must not be empty");
}

void ExperimentConfig::validate() const {
    gen.validate();
    movt.validate();
    pixt.validate();
    train.validate();
    sweep.validate();
}

ExperimentConfig experiment_from_json_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError("experiment config is not valid JSON: " + std::string(e.what()));
    }
    if (!j.is_object()) throw ConfigError("experiment config must be a JSON object");

    ExperimentConfig cfg;
    bool saw_gen_seed = false, saw_train_seed = false;
    for (const auto& [key, v] : j.items()) {
        if (key == "seed") {
            cfg.seed = get_u64(v, "seed");
        } else if (key == "gen") {
            if (!v.is_object()) bad_type("gen", "an object");
            parse_gen(v, &cfg.gen, &saw_gen_seed);
        } else if (key == "movt") {
            if (!v.is_object()) bad_type("movt", "an object");
            parse_movt(v, &cfg.movt);
        } else if (key == "pixt") {
            if (!v.is_object()) bad_type("pixt", "an object");
            parse_pixt(v, &cfg.pixt);
        } else if (key == "train") {
            if (!v.is_object()) bad_type("train", "an object");
            parse_train(v, &cfg.train, &saw_train_seed);
        } else if (key == "sweep") {
            if (!v.is_object()) bad_type("sweep", "an object");
            parse_sweep(v, &cfg.sweep);
        } else {
            throw ConfigError(key + ": unknown section");
        }
    }

    // Unpinned section seeds branch off the root so one top-level seed swap
    // moves the whole experiment while per-section pins stay possible.
    const Rng root(cfg.seed);
    if (!saw_gen_seed) cfg.gen.seed = root.derive(1).state();
    if (!saw_train_seed) cfg.train.seed = root.derive(2).state();

    cfg.validate();
    return cfg;
}

ExperimentConfig load_experiment(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read experiment config: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return experiment_from_json_text(buf.str());
}

std::string experiment_to_json(const ExperimentConfig& cfg) {
    json j;
    j["seed"] = cfg.seed;
    json g;
    g["families"] = cfg.gen.families;
    g["train_per_class"] = cfg.gen.train_per_class;
    g["val_per_class"] = cfg.gen.val_per_class;
    g["test_per_class"] = cfg.gen.test_per_class;
    g["frames"] = cfg.gen.frames;
    g["tracks"] = cfg.gen.tracks;
    g["noise_sigma"] = cfg.gen.noise_sigma;
    g["occlusion_rate"] = cfg.gen.occlusion_rate;
    g["speed_jitter"] = cfg.gen.speed_jitter;
    g["seed"] = cfg.gen.seed;
    g["render"] = cfg.gen.render;
    g["image_h"] = cfg.gen.image_h;
    g["image_w"] = cfg.gen.image_w;
    g["blob_sigma"] = cfg.gen.blob_sigma;
    j["gen"] = g;
    json m;
    m["embed_dim"] = cfg.movt.embed_dim;
    m["conv_kernel"] = cfg.movt.conv_kernel;
    m["layers"] = cfg.movt.layers;
    m["heads"] = cfg.movt.heads;
    m["ff_expansion"] = cfg.movt.ff_expansion;
    m["mlp_depth"] = cfg.movt.mlp_depth;
    m["dropout"] = cfg.movt.dropout;
    m["head"] = cfg.movt.head == model::HeadKind::classification ? "classification" : "regression";
    m["classes"] = cfg.movt.classes;
    m["output_dim"] = cfg.movt.output_dim;
    m["expected_frames"] = cfg.movt.expected_frames;
    m["expected_tracks"] = cfg.movt.expected_tracks;
    j["movt"] = m;
    json p;
    p["image_h"] = cfg.pixt.image_h;
    p["image_w"] = cfg.pixt.image_w;
    p["patch"] = cfg.pixt.patch;
    p["embed_dim"] = cfg.pixt.embed_dim;
    p["conv_kernel"] = cfg.pixt.conv_kernel;
    p["layers"] = cfg.pixt.layers;
    p["heads"] = cfg.pixt.heads;
    p["ff_expansion"] = cfg.pixt.ff_expansion;
    p["mlp_depth"] = cfg.pixt.mlp_depth;
    p["dropout"] = cfg.pixt.dropout;
    p["head"] = cfg.pixt.head == model::HeadKind::classification ? "classification" : "regression";
    p["classes"] = cfg.pixt.classes;
    p["output_dim"] = cfg.pixt.output_dim;
    p["expected_frames"] = cfg.pixt.expected_frames;
    j["pixt"] = p;
    json t;
    t["epochs"] = cfg.train.epochs;
    t["lr"] = cfg.train.lr;
    t["batch_size"] = cfg.train.batch_size;
    t["seed"] = cfg.train.seed;
    t["max_norm"] = cfg.train.max_norm;
    t["weight_decay"] = cfg.train.weight_decay;
    t["loss"] = train::loss_name(cfg.train.loss);
    t["plateau_factor"] = cfg.train.plateau.factor;
    t["plateau_patience"] = cfg.train.plateau.patience;
    t["plateau_min_delta"] = cfg.train.plateau.min_delta;
    t["plateau_min_lr"] = cfg.train.plateau.min_lr;
    j["train"] = t;
    json s;
    s["fractions"] = cfg.sweep.fractions;
    s["crops"] = cfg.sweep.crops;
    s["track_counts"] = cfg.sweep.track_counts;
    s["seeds"] = cfg.sweep.seeds;
    j["sweep"] = s;
    return j.dump(2);
}

}  // namespace movt::expcfg
