#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "movt/common.hpp"
#include "movt/evalmetrics.hpp"

namespace movt::fusion {

// Per-clip logits from one model branch. gflops annotates the branch's
// per-inference compute for fusion bookkeeping (0 = unknown).
struct LogitsTable {
    std::string source;
    double gflops = 0;
    std::vector<std::string> ids;
    std::vector<std::vector<double>> logits;  // one row per id, uniform width

    std::size_t classes() const { return logits.empty() ? 0 : logits.front().size(); }
    // Throws DataError on ragged rows, duplicate ids, or id/row count mismatch.
    void validate() const;
};

// CSV with header "id,l0,...,l{C-1}".
void save_logits_csv(const LogitsTable& table, const std::string& path);
LogitsTable load_logits_csv(const std::string& path, std::string source_tag = "");

struct FuseOutcome {
    LogitsTable fused;
    std::vector<std::string> only_a;  // ids missing from b, excluded
    std::vector<std::string> only_b;  // ids missing from a, excluded
};

// Per shared id: fused = w * a + (1 - w) * b, in a's row order. When
// prob_space is set, rows are softmaxed before combining. Throws ConfigError
// for w outside [0,1]; DataError on class-count mismatch or empty
// intersection.
FuseOutcome late_fuse(const LogitsTable& a, const LogitsTable& b, double w = 0.5,
                      bool prob_space = false);

struct FusionReport {
    double w = 0.5;
    bool prob_space = false;
    double accuracy_a = 0;
    double accuracy_b = 0;
    double accuracy_fused = 0;
    double delta_vs_a = 0;  // fused - a
    double delta_vs_b = 0;  // fused - b
    double gflops_a = 0;
    double gflops_b = 0;
    double gflops_total = 0;  // exact sum of the two annotations
    std::size_t shared_ids = 0;
    std::vector<std::string> dropped_ids;  // union of one-sided ids
};

std::string fusion_report_to_json(const FusionReport& r);

// Labels keyed by clip id; every shared id must be covered. Accuracies are
// top-1 over the shared id set for branch a, branch b, and the fusion.
FusionReport fuse_and_eval(const LogitsTable& a, const LogitsTable& b,
                           const std::vector<std::pair<std::string, std::size_t>>& labels,
                           double w = 0.5, bool prob_space = false);

}  // namespace movt::fusion
