#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "movt/common.hpp"

namespace movt::eval {

// One classified clip: raw logits, their softmax, and the ground truth.
struct PredictionRecord {
    std::string id;
    std::vector<double> logits;
    std::vector<double> probs;  // softmax(logits), sums to 1 within 1e-5
    std::size_t label = 0;

    double confidence() const;      // max probability
    std::size_t predicted() const;  // argmax of probs, ties to the lowest index
};

// Builds a record with probs = softmax(logits).
PredictionRecord make_record(std::string id, std::vector<double> logits, std::size_t label);

// Throws DataError on: empty set, inconsistent class counts, labels out of
// range, or probability vectors that do not sum to 1 within 1e-5.
void validate_records(const std::vector<PredictionRecord>& records);

// Fraction of records whose predicted class equals the label.
double top1_accuracy(const std::vector<PredictionRecord>& records);

// Correct fraction per class present in the records. When expected_classes
// > 0, classes in [0, expected_classes) with no record are omitted from the
// map and appended to *absent (callers surface those as warnings).
std::map<std::size_t, double> per_class_accuracy(const std::vector<PredictionRecord>& records,
                                                 std::size_t expected_classes = 0,
                                                 std::vector<std::size_t>* absent = nullptr);

// Sample correlation coefficient. Throws DataError for fewer than two points
// or zero variance on either side.
double pearson_r(const std::vector<double>& pred, const std::vector<double>& truth);

// Rigid pose: translation in meters, orientation as a unit quaternion
// (w, x, y, z), norm within 1e-6 of 1.
struct Pose {
    std::array<double, 3> t{0, 0, 0};
    std::array<double, 4> q{1, 0, 0, 0};
};

std::array<double, 4> quat_mul(const std::array<double, 4>& a, const std::array<double, 4>& b);
std::array<double, 4> quat_conj(const std::array<double, 4>& q);
// Rotation angle of a unit quaternion in degrees, in [0, 180].
double quat_angle_deg(const std::array<double, 4>& q);

struct RpeResult {
    double translational_rmse = 0;  // meters
    double rotational_rmse_deg = 0;
};

// Relative pose error over consecutive steps: translational error per step is
// the norm of the predicted minus true frame-to-frame displacement; the
// rotational error is the angle between predicted and true frame-to-frame
// rotations. Both aggregated as RMSE. Throws DataError on length mismatch,
// fewer than two poses, or non-unit quaternions.
RpeResult rpe(const std::vector<Pose>& pred, const std::vector<Pose>& truth);

struct CoveragePoint {
    double threshold = 0;
    double coverage = 0;   // fraction of records with confidence >= threshold
    double accuracy = 0;   // over the kept subset; NaN when !defined
    bool defined = false;  // false iff the kept subset is empty
};

std::vector<CoveragePoint> coverage_curve(const std::vector<PredictionRecord>& records,
                                          const std::vector<double>& thresholds);

// Columns: threshold, coverage, accuracy ("na" when undefined).
void save_coverage_csv(const std::string& path, const std::vector<CoveragePoint>& points);
// Columns: class, accuracy.
void save_per_class_csv(const std::string& path, const std::map<std::size_t, double>& acc);

}  // namespace movt::eval
