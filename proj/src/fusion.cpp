#include "movt/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "movt/csvio.hpp"

namespace movt::fusion {

void LogitsTable::validate() const {
    if (ids.size() != logits.size())
        throw DataError("logits table '" + source + "': " + std::to_string(ids.size()) +
                        " ids vs " + std::to_string(logits.size()) + " rows");
    const std::size_t c = classes();
    std::unordered_set<std::string> seen;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        if (logits[i].size() != c)
            throw DataError("logits table '" + source + "': row " + std::to_string(i) +
                            " has " + std::to_string(logits[i].size()) + " classes, expected " +
                            std::to_string(c));
        for (double v : logits[i])
            if (!std::isfinite(v))
                throw DataError("logits table '" + source + "': non-finite value in row '" +
                                ids[i] + "'");
        if (!seen.insert(ids[i]).second)
            throw DataError("logits table '" + source + "': duplicate id '" + ids[i] + "'");
    }
}

void save_logits_csv(const LogitsTable& table, const std::string& path) {
    table.validate();
    std::vector<std::string> header{"id"};
    for (std::size_t c = 0; c < table.classes(); ++c) header.push_back("l" + std::to_string(c));
    std::vector<std::vector<std::string>> rows;
    rows.reserve(table.ids.size());
    for (std::size_t i = 0; i < table.ids.size(); ++i) {
        std::vector<std::string> row{table.ids[i]};
        for (double v : table.logits[i]) row.push_back(csvio::num9(v));
        rows.push_back(std::move(row));
    }
    csvio::save_rows(path, header, rows);
}

LogitsTable load_logits_csv(const std::string& path, std::string source_tag) {
    const auto csv = csvio::load_rows(path);
    if (csv.header.empty() || csv.header[0] != "id")
        throw DataError(path + ": logits csv must start with an 'id' column");
    for (std::size_t c = 1; c < csv.header.size(); ++c)
        if (csv.header[c] != "l" + std::to_string(c - 1))
            throw DataError(path + ": expected column 'l" + std::to_string(c - 1) + "', got '" +
                            csv.header[c] + "'");
    if (csv.header.size() < 2) throw DataError(path + ": logits csv has no logit columns");
    LogitsTable table;
    table.source = source_tag.empty() ? path : std::move(source_tag);
    for (const auto& row : csv.rows) {
        table.ids.push_back(row[0]);
        std::vector<double> l;
        l.reserve(row.size() - 1);
        for (std::size_t c = 1; c < row.size(); ++c)
            l.push_back(csvio::parse_double(row[c], path + " row '" + row[0] + "'"));
        table.logits.push_back(std::move(l));
    }
    table.validate();
    return table;
}

static std::vector<double> softmax_row(const std::vector<double>& in) {
    double mx = in[0];
    for (double v : in) mx = std::max(mx, v);
    std::vector<double> out(in.size());
    double sum = 0;
    for (std::size_t i = 0; i < in.size(); ++i) {
        out[i] = std::exp(in[i] - mx);
        sum += out[i];
    }
    for (double& v : out) v /= sum;
    return out;
}

FuseOutcome late_fuse(const LogitsTable& a, const LogitsTable& b, double w, bool prob_space) {
    if (!(w >= 0.0 && w <= 1.0))
        throw ConfigError("fusion weight must lie in [0,1], got " + std::to_string(w));
    a.validate();
    b.validate();
    if (a.classes() != b.classes())
        throw DataError("logit dimension mismatch: " + std::to_string(a.classes()) + " vs " +
                        std::to_string(b.classes()));
    std::unordered_map<std::string, std::size_t> b_row;
    for (std::size_t i = 0; i < b.ids.size(); ++i) b_row[b.ids[i]] = i;

    FuseOutcome out;
    out.fused.source = a.source + "+" + b.source;
    out.fused.gflops = a.gflops + b.gflops;
    std::unordered_set<std::string> a_ids(a.ids.begin(), a.ids.end());
    for (const auto& id : b.ids)
        if (!a_ids.count(id)) out.only_b.push_back(id);
    for (std::size_t i = 0; i < a.ids.size(); ++i) {
        auto it = b_row.find(a.ids[i]);
        if (it == b_row.end()) {
            out.only_a.push_back(a.ids[i]);
            continue;
        }
        const auto& ra = prob_space ? softmax_row(a.logits[i]) : a.logits[i];
        const auto& rb = prob_space ? softmax_row(b.logits[it->second]) : b.logits[it->second];
        std::vector<double> fused(ra.size());
        for (std::size_t c = 0; c < ra.size(); ++c) fused[c] = w * ra[c] + (1.0 - w) * rb[c];
        out.fused.ids.push_back(a.ids[i]);
        out.fused.logits.push_back(std::move(fused));
    }
    if (out.fused.ids.empty()) throw DataError("fusion inputs share no ids");
    return out;
}

static double table_top1(const LogitsTable& t,
                         const std::unordered_map<std::string, std::size_t>& label_of) {
    std::vector<eval::PredictionRecord> records;
    records.reserve(t.ids.size());
    for (std::size_t i = 0; i < t.ids.size(); ++i) {
        auto it = label_of.find(t.ids[i]);
        if (it == label_of.end()) throw DataError("no label for id '" + t.ids[i] + "'");
        records.push_back(eval::make_record(t.ids[i], t.logits[i], it->second));
    }
    return eval::top1_accuracy(records);
}

FusionReport fuse_and_eval(const LogitsTable& a, const LogitsTable& b,
                           const std::vector<std::pair<std::string, std::size_t>>& labels,
                           double w, bool prob_space) {
    auto outcome = late_fuse(a, b, w, prob_space);
    std::unordered_map<std::string, std::size_t> label_of;
    for (const auto& [id, lbl] : labels) label_of[id] = lbl;

    // Branch accuracies are measured over the shared id set so all three
    // numbers describe the same clips.
    std::unordered_map<std::string, std::size_t> a_row, b_row;
    for (std::size_t i = 0; i < a.ids.size(); ++i) a_row[a.ids[i]] = i;
    for (std::size_t i = 0; i < b.ids.size(); ++i) b_row[b.ids[i]] = i;
    LogitsTable a_shared, b_shared;
    a_shared.source = a.source;
    b_shared.source = b.source;
    for (const auto& id : outcome.fused.ids) {
        a_shared.ids.push_back(id);
        a_shared.logits.push_back(a.logits[a_row.at(id)]);
        b_shared.ids.push_back(id);
        b_shared.logits.push_back(b.logits[b_row.at(id)]);
    }

    FusionReport r;
    r.w = w;
    r.prob_space = prob_space;
    r.accuracy_a = table_top1(a_shared, label_of);
    r.accuracy_b = table_top1(b_shared, label_of);
    r.accuracy_fused = table_top1(outcome.fused, label_of);
    r.delta_vs_a = r.accuracy_fused - r.accuracy_a;
    r.delta_vs_b = r.accuracy_fused - r.accuracy_b;
    r.gflops_a = a.gflops;
    r.gflops_b = b.gflops;
    r.gflops_total = a.gflops + b.gflops;
    r.shared_ids = outcome.fused.ids.size();
    r.dropped_ids = outcome.only_a;
    r.dropped_ids.insert(r.dropped_ids.end(), outcome.only_b.begin(), outcome.only_b.end());
    return r;
}

std::string fusion_report_to_json(const FusionReport& r) {
    nlohmann::json j;
    j["w"] = r.w;
    j["prob_space"] = r.prob_space;
    j["accuracy_a"] = r.accuracy_a;
    j["accuracy_b"] = r.accuracy_b;
    j["accuracy_fused"] = r.accuracy_fused;
    j["delta_vs_a"] = r.delta_vs_a;
    j["delta_vs_b"] = r.delta_vs_b;
    j["gflops_a"] = r.gflops_a;
    j["gflops_b"] = r.gflops_b;
    j["gflops_total"] = r.gflops_total;
    j["shared_ids"] = r.shared_ids;
    j["dropped_ids"] = r.dropped_ids;
    return j.dump(2) + "\n";
}

}  // namespace movt::fusion
