#include "movt/evalmetrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "movt/csvio.hpp"

namespace movt::eval {

double PredictionRecord::confidence() const {
    double best = -std::numeric_limits<double>::infinity();
    for (double p : probs) best = std::max(best, p);
    return best;
}

std::size_t PredictionRecord::predicted() const {
    std::size_t arg = 0;
    for (std::size_t i = 1; i < probs.size(); ++i)
        if (probs[i] > probs[arg]) arg = i;
    return arg;
}

PredictionRecord make_record(std::string id, std::vector<double> logits, std::size_t label) {
    if (logits.empty()) throw DataError("record '" + id + "' has no logits");
    PredictionRecord r;
    r.id = std::move(id);
    r.label = label;
    double mx = logits[0];
    for (double v : logits) mx = std::max(mx, v);
    double sum = 0;
    r.probs.resize(logits.size());
    for (std::size_t i = 0; i < logits.size(); ++i) {
        r.probs[i] = std::exp(logits[i] - mx);
        sum += r.probs[i];
    }
    for (double& p : r.probs) p /= sum;
    r.logits = std::move(logits);
    return r;
}

void validate_records(const std::vector<PredictionRecord>& records) {
    if (records.empty()) throw DataError("no prediction records");
    const std::size_t classes = records.front().probs.size();
    for (const auto& r : records) {
        if (r.probs.size() != classes)
            throw DataError("record '" + r.id + "' has " + std::to_string(r.probs.size()) +
                            " classes, expected " + std::to_string(classes));
        if (r.label >= classes)
            throw DataError("record '" + r.id + "' label " + std::to_string(r.label) +
                            " out of range for " + std::to_string(classes) + " classes");
        double sum = 0;
        for (double p : r.probs) {
            if (!std::isfinite(p) || p < 0)
                throw DataError("record '" + r.id + "' has an invalid probability");
            sum += p;
        }
        if (std::abs(sum - 1.0) > 1e-5)
            throw DataError("record '" + r.id + "' probabilities sum to " + std::to_string(sum));
    }
}

double top1_accuracy(const std::vector<PredictionRecord>& records) {
    validate_records(records);
    std::size_t correct = 0;
    for (const auto& r : records) correct += r.predicted() == r.label;
    return static_cast<double>(correct) / static_cast<double>(records.size());
}

std::map<std::size_t, double> per_class_accuracy(const std::vector<PredictionRecord>& records,
                                                 std::size_t expected_classes,
                                                 std::vector<std::size_t>* absent) {
    validate_records(records);
    std::map<std::size_t, std::pair<std::size_t, std::size_t>> tally;  // label -> (correct, total)
    for (const auto& r : records) {
        auto& t = tally[r.label];
        t.first += r.predicted() == r.label;
        t.second += 1;
    }
    std::map<std::size_t, double> acc;
    for (const auto& [cls, t] : tally)
        acc[cls] = static_cast<double>(t.first) / static_cast<double>(t.second);
    if (absent)
        for (std::size_t c = 0; c < expected_classes; ++c)
            if (!tally.count(c)) absent->push_back(c);
    return acc;
}

double pearson_r(const std::vector<double>& pred, const std::vector<double>& truth) {
    if (pred.size() != truth.size())
        throw DataError("correlation inputs differ in length: " + std::to_string(pred.size()) +
                        " vs " + std::to_string(truth.size()));
    const std::size_t n = pred.size();
    if (n < 2) throw DataError("correlation needs at least two points");
    double mp = 0, mt = 0;
    for (std::size_t i = 0; i < n; ++i) {
        mp += pred[i];
        mt += truth[i];
    }
    mp /= static_cast<double>(n);
    mt /= static_cast<double>(n);
    double spp = 0, stt = 0, spt = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dp = pred[i] - mp;
        const double dt = truth[i] - mt;
        spp += dp * dp;
        stt += dt * dt;
        spt += dp * dt;
    }
    if (spp == 0 || stt == 0) throw DataError("correlation undefined: zero variance");
    return spt / std::sqrt(spp * stt);
}

std::array<double, 4> quat_mul(const std::array<double, 4>& a, const std::array<double, 4>& b) {
    return {a[0] * b[0] - a[1] * b[1] - a[2] * b[2] - a[3] * b[3],
            a[0] * b[1] + a[1] * b[0] + a[2] * b[3] - a[3] * b[2],
            a[0] * b[2] - a[1] * b[3] + a[2] * b[0] + a[3] * b[1],
            a[0] * b[3] + a[1] * b[2] - a[2] * b[1] + a[3] * b[0]};
}

std::array<double, 4> quat_conj(const std::array<double, 4>& q) {
    return {q[0], -q[1], -q[2], -q[3]};
}

double quat_angle_deg(const std::array<double, 4>& q) {
    const double vec = std::sqrt(q[1] * q[1] + q[2] * q[2] + q[3] * q[3]);
    return 2.0 * std::atan2(vec, std::abs(q[0])) * 180.0 / std::numbers::pi;
}

static void check_unit(const Pose& p, std::size_t i, const char* which) {
    const double n = std::sqrt(p.q[0] * p.q[0] + p.q[1] * p.q[1] + p.q[2] * p.q[2] + p.q[3] * p.q[3]);
    if (std::abs(n - 1.0) > 1e-6)
        throw DataError(std::string(which) + " pose " + std::to_string(i) +
                        " has a non-unit quaternion (norm " + std::to_string(n) + ")");
}

RpeResult rpe(const std::vector<Pose>& pred, const std::vector<Pose>& truth) {
    if (pred.size() != truth.size())
        throw DataError("pose sequences differ in length: " + std::to_string(pred.size()) +
                        " vs " + std::to_string(truth.size()));
    if (pred.size() < 2) throw DataError("relative pose error needs at least two poses");
    for (std::size_t i = 0; i < pred.size(); ++i) {
        check_unit(pred[i], i, "predicted");
        check_unit(truth[i], i, "ground-truth");
    }
    double t_sq = 0, r_sq = 0;
    const std::size_t steps = pred.size() - 1;
    for (std::size_t i = 0; i < steps; ++i) {
        double te = 0;
        for (int k = 0; k < 3; ++k) {
            const double dp = pred[i + 1].t[k] - pred[i].t[k];
            const double dt = truth[i + 1].t[k] - truth[i].t[k];
            te += (dp - dt) * (dp - dt);
        }
        t_sq += te;
        const auto rel_pred = quat_mul(quat_conj(pred[i].q), pred[i + 1].q);
        const auto rel_true = quat_mul(quat_conj(truth[i].q), truth[i + 1].q);
        const double ang = quat_angle_deg(quat_mul(rel_pred, quat_conj(rel_true)));
        r_sq += ang * ang;
    }
    RpeResult out;
    out.translational_rmse = std::sqrt(t_sq / static_cast<double>(steps));
    out.rotational_rmse_deg = std::sqrt(r_sq / static_cast<double>(steps));
    return out;
}

std::vector<CoveragePoint> coverage_curve(const std::vector<PredictionRecord>& records,
                                          const std::vector<double>& thresholds) {
    validate_records(records);
    std::vector<CoveragePoint> out;
    out.reserve(thresholds.size());
    for (double t : thresholds) {
        CoveragePoint p;
        p.threshold = t;
        std::size_t kept = 0, correct = 0;
        for (const auto& r : records) {
            if (r.confidence() >= t) {
                ++kept;
                correct += r.predicted() == r.label;
            }
        }
        p.coverage = static_cast<double>(kept) / static_cast<double>(records.size());
        p.defined = kept > 0;
        p.accuracy = p.defined ? static_cast<double>(correct) / static_cast<double>(kept)
                               : std::numeric_limits<double>::quiet_NaN();
        out.push_back(p);
    }
    return out;
}

void save_coverage_csv(const std::string& path, const std::vector<CoveragePoint>& points) {
    std::vector<std::vector<std::string>> rows;
    for (const auto& p : points)
        rows.push_back({csvio::num9(p.threshold), csvio::num9(p.coverage),
                        p.defined ? csvio::num9(p.accuracy) : std::string("na")});
    csvio::save_rows(path, {"threshold", "coverage", "accuracy"}, rows);
}

void save_per_class_csv(const std::string& path, const std::map<std::size_t, double>& acc) {
    std::vector<std::vector<std::string>> rows;
    for (const auto& [cls, a] : acc) rows.push_back({std::to_string(cls), csvio::num9(a)});
    csvio::save_rows(path, {"class", "accuracy"}, rows);
}

}  // namespace movt::eval
