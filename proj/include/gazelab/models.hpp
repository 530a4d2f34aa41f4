#pragma once

// Gaze estimators:
//   face-eyes      kNN on face HoG -> head pose, kNN on eyes HoG -> eye
//                  correction, composed into the final direction.
//   face           kNN on face HoG straight to the final direction.
//   kinect-linear  least-squares map from annotated (yaw, pitch, roll) to
//                  (azimuth, elevation); appearance is ignored.

#include "gazelab/datasets.hpp"
#include "gazelab/descriptor.hpp"
#include "gazelab/orientation.hpp"

#include <array>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace gazelab {

enum class ModelVariant { FaceEyes, Face, KinectLinear };

std::string_view to_string(ModelVariant variant);
/// "face-eyes", "face", "kinect-linear"; throws ParameterError otherwise.
ModelVariant parse_model_variant(std::string_view text);

struct ModelConfig {
    ModelVariant variant = ModelVariant::FaceEyes;
    int k = 5;
    double epsilon = 1e-6;  // similarity = 1 / (distance + epsilon)
    HogParams hog;
    RegionSizes sizes;
    bool cross_looker = false;

    friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

/// Throws ParameterError on k < 1, epsilon <= 0 or bad HoG parameters.
void validate(const ModelConfig& config);

struct TrainingExample {
    std::string example_id;
    std::string looker_id;
    int block_id = 0;
    HogDescriptor face_descriptor;
    std::optional<HogDescriptor> eyes_descriptor;
    HeadPose head_pose;
    EyeGazeCorrection eye_correction;
    GazeDirection gaze;
};

/// Descriptors from the trial's patches (eyes only when requested); head pose
/// is the annotated one and the correction is derived from it and the true
/// gaze, so compose(head_pose, eye_correction) == gaze.
TrainingExample make_example(const TrialRecord& trial, const HogParams& hog, bool with_eyes);
std::vector<TrainingExample> examples_from_trials(std::span<const TrialRecord> trials, const ModelConfig& config);

struct Neighbor {
    std::size_t index = 0;  // position in the model's example table
    double distance = 0.0;
    double weight = 0.0;
};

/// Exact brute-force k-nearest-neighbor search over descriptors. Results are
/// ordered by (distance, id) so ties never depend on insertion order.
class KnnIndex {
public:
    KnnIndex() = default;
    /// Throws ParameterError unless 1 <= k <= descriptors.size(), epsilon > 0
    /// and all descriptors share one layout.
    KnnIndex(std::vector<HogDescriptor> descriptors, std::vector<std::string> ids, int k, double epsilon);

    std::vector<Neighbor> search(const HogDescriptor& query) const;

    std::size_t size() const { return descriptors_.size(); }
    int k() const { return k_; }
    double epsilon() const { return epsilon_; }
    const HogLayout& layout() const { return descriptors_.front().layout; }

private:
    std::vector<HogDescriptor> descriptors_;
    std::vector<std::string> ids_;
    int k_ = 1;
    double epsilon_ = 1e-6;
};

/// az_deg = az[0]*yaw + az[1]*pitch + az[2]*roll + az[3]; same for el.
struct LinearGazeMap {
    std::array<double, 4> azimuth{};
    std::array<double, 4> elevation{};
};

/// Least-squares fit of (azimuth, elevation) on (yaw, pitch, roll, 1) via
/// column-pivoted QR. Throws SingularFitError when the design is rank
/// deficient, EmptyInputError on no data.
LinearGazeMap fit_linear_gaze_map(std::span<const EulerAngles> poses, std::span<const GazeDirection> gazes);

class Model {
public:
    /// Examples are sorted by id, so the result does not depend on input order.
    /// Throws EmptyInputError, ParameterError (k larger than the data, several
    /// lookers without cross_looker, missing eyes descriptors) or
    /// SingularFitError (kinect-linear).
    static Model train(std::vector<TrainingExample> examples, const ModelConfig& config);

    const ModelConfig& config() const { return config_; }
    ModelVariant variant() const { return config_.variant; }
    const std::vector<TrainingExample>& examples() const { return examples_; }
    const KnnIndex& face_index() const { return face_index_; }
    const KnnIndex& eyes_index() const { return eyes_index_; }
    const LinearGazeMap& linear_map() const { return linear_; }
    /// Sorted unique (looker, block) pairs seen in training.
    const std::vector<std::pair<std::string, int>>& provenance() const { return provenance_; }
    std::size_t training_size() const { return training_size_; }

    /// Text container, version 1; doubles use shortest round-trip form so a
    /// reloaded model predicts bit-identically.
    std::string to_text() const;
    /// Throws ModelFormatError.
    static Model from_text(std::string_view text);

private:
    void build_indexes();

    ModelConfig config_;
    std::vector<TrainingExample> examples_;
    KnnIndex face_index_;
    KnnIndex eyes_index_;
    LinearGazeMap linear_;
    std::vector<std::pair<std::string, int>> provenance_;
    std::size_t training_size_ = 0;
};

Model train(std::vector<TrainingExample> examples, const ModelConfig& config);
void save_model(const Model& model, const std::filesystem::path& path);
Model load_model(const std::filesystem::path& path);

struct GazePrediction {
    GazeDirection direction;
    std::optional<HeadPose> head_estimate;
    std::optional<EyeGazeCorrection> correction_estimate;
    std::vector<Neighbor> face_neighbors;
    std::vector<Neighbor> eyes_neighbors;
};

/// Throws LayoutMismatchError on descriptors of the wrong layout and
/// ParameterError when the model is not a face-eyes model.
GazePrediction predict_face_eyes(const Model& model, const HogDescriptor& face, const HogDescriptor& eyes);
/// Head-only pathway of a face-eyes model: compose(head_estimate, identity).
GazePrediction eyes_invisible_query(const Model& model, const HogDescriptor& face);
/// Similarity-weighted mean of the neighbors' gaze vectors, renormalized.
/// Throws PredictionError when the mean vanishes.
GazePrediction predict_face(const Model& model, const HogDescriptor& face);
GazePrediction predict_kinect_linear(const Model& model, const HeadPose& head_pose);

/// Runs the model's pathway on one trial: appearance models see only the
/// patches (face-eyes switches to the head-only pathway for eyes-invisible),
/// kinect-linear sees only the annotated head pose.
GazePrediction predict_trial(const Model& model, const TrialRecord& trial, Condition condition);

}  // namespace gazelab
