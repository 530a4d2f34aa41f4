#pragma once

// Scoring of gaze responses against ground truth: exact and one-off target
// accuracy, per-column row/column accuracy, and the bias / standard deviation
// decomposition.
//
// Sign conventions for signed errors (degrees of visual angle):
//   column: (pred_az - true_az) * s, s = sign(true_az); positive means further
//           toward the periphery. The center column uses s = +1 (toward the
//           looker's right) unless told otherwise.
//   row:    true_el - pred_el; positive means the response is lower, i.e.
//           further from the resting direction.

#include "gazelab/datasets.hpp"
#include "gazelab/geometry.hpp"
#include "gazelab/models.hpp"

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace gazelab {

struct Response {
    std::string trial_id;
    std::optional<TargetId> predicted_target;
    std::optional<GazeDirection> predicted_direction;
    /// Error class of a failed prediction; empty on success. Failed responses
    /// carry neither target nor direction and score as incorrect.
    std::string error;
    std::vector<std::pair<std::string, double>> face_neighbors;  // (example id, weight)
    std::vector<std::pair<std::string, double>> eyes_neighbors;

    bool valid() const { return error.empty(); }
};

struct Truth {
    std::string trial_id;
    TargetId target;
    GazeDirection direction;
    Vec3 eye_center;
};

Truth truth_of(const TrialRecord& trial);
std::vector<Truth> truths_of(std::span<const TrialRecord> trials);

/// Responses and truths are matched by trial id; each side must cover the
/// other exactly (UnmatchedTrialError otherwise). Empty input throws
/// EmptyInputError.
double exact_accuracy(std::span<const Response> responses, std::span<const Truth> truths);
/// |d_row| <= 1 and |d_col| <= 1, exact hits included.
double one_off_accuracy(std::span<const Response> responses, std::span<const Truth> truths);

struct BiasStats {
    double col_bias_deg = 0.0;
    double col_std_deg = 0.0;
    double row_bias_deg = 0.0;
    double row_std_deg = 0.0;
    std::size_t n_trials = 0;
};

/// Population statistics over every response with a direction, or a target
/// mapped to its direction through the scene grid. Responses with neither
/// are skipped; EmptyInputError when none remain. center_column_sign must be
/// +1 or -1 (ParameterError).
BiasStats bias_stats(std::span<const Response> responses, std::span<const Truth> truths, const SceneLayout& scene,
                     double center_column_sign = 1.0);

struct ColumnAccuracy {
    int col = 0;
    std::size_t n_trials = 0;
    double row_accuracy = 0.0;
    double col_accuracy = 0.0;
};

/// One entry per target column present in the truths, ascending.
std::vector<ColumnAccuracy> column_accuracy(std::span<const Response> responses, std::span<const Truth> truths);

struct PositionAccuracy {
    int position = 0;  // observer seat 1..4
    std::vector<ColumnAccuracy> columns;
};

/// Throws UnknownPositionError for a seat outside 1..4.
PositionAccuracy position_accuracy(std::span<const Response> responses, std::span<const Truth> truths,
                                   int observer_position);

struct EvalEntry {
    std::string looker_id;
    Condition condition = Condition::EyesVisible;
    std::string model;
    std::size_t n_trials = 0;
    std::size_t n_invalid = 0;  // failed predictions and rays missing the table
    double exact_accuracy = 0.0;
    double one_off_accuracy = 0.0;
    BiasStats bias;
    std::vector<ColumnAccuracy> columns;
};

struct EvalReport {
    std::vector<EvalEntry> entries;  // sorted by looker id
    std::vector<PositionAccuracy> positions;
};

/// Response for one trial; model errors are caught and recorded as invalid.
Response predict_response(const Model& model, const TrialRecord& trial, const SceneLayout& scene,
                          Condition condition);
std::vector<Response> predict_dataset(const Model& model, std::span<const TrialRecord> trials,
                                      const SceneLayout& scene, Condition condition);

struct EvalOptions {
    bool require_disjoint = true;
    double center_column_sign = 1.0;
    std::vector<int> observer_positions;  // seats to tag position tables with
};

/// Groups trials by looker and scores each group.
EvalReport evaluate_responses(std::span<const Response> responses, std::span<const TrialRecord> trials,
                              const SceneLayout& scene, Condition condition, const std::string& model_name,
                              const EvalOptions& options = {});

/// Throws ValidationError when a test trial's (looker, block) was used for
/// training.
void check_disjoint(const Model& model, std::span<const TrialRecord> trials);
/// Test lookers absent from the training data, sorted.
std::vector<std::string> unseen_lookers(const Model& model, std::span<const TrialRecord> trials);

/// Predicts every trial from its patches (kinect-linear from the annotated
/// pose), snaps to targets and aggregates. Throws EmptyInputError on an
/// empty test set.
EvalReport run_evaluation(const Model& model, const Dataset& test, Condition condition,
                          const EvalOptions& options = {});

/// Table-style text report (fixed decimals).
std::string report_to_text(const EvalReport& report);
/// Machine-readable JSON report.
std::string report_to_json(const EvalReport& report);

struct PredictionsFile {
    std::string model;
    Condition condition = Condition::EyesVisible;
    std::vector<Response> responses;
};

std::string predictions_to_text(const PredictionsFile& file);
/// Throws MalformedRecordError / SchemaVersionError.
PredictionsFile predictions_from_text(std::string_view text);

}  // namespace gazelab
