#pragma once

// Procedural gaze trials from a parametric "synthetic looker".
//
// The head is a sphere seen by an orthographic camera on the +Z axis. Facial
// features (eyes, nose, mouth, hairline) sit at fixed spherical coordinates in
// the head frame and are drawn wherever they land on the camera-facing
// hemisphere after rotating by the head quaternion. Irises shift inside the
// eye whites in proportion to the eye correction's yaw and pitch.

#include "gazelab/datasets.hpp"
#include "gazelab/geometry.hpp"
#include "gazelab/orientation.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace gazelab {

struct FeatureParams {
    double head_radius_px = 36.0;
    double eye_longitude_deg = 22.0;
    double eye_latitude_deg = 10.0;
    double eye_radius_deg = 12.0;
    double iris_radius_deg = 4.5;
    double iris_gain = 0.3;  // iris angular shift per degree of eye rotation
    double nose_latitude_deg = -10.0;
    double nose_radius_deg = 6.0;
    double mouth_latitude_deg = -32.0;
    double mouth_radius_deg = 9.0;
    double hair_latitude_deg = 48.0;
    // Planted asymmetry: all features drawn shifted on the sphere.
    double feature_longitude_offset_deg = 0.0;
    double feature_latitude_offset_deg = 0.0;

    double background = 0.15;
    double skin = 0.62;
    double hair = 0.28;
    double eye_white = 0.95;
    double iris = 0.08;
    double nose = 0.45;
    double mouth = 0.3;
    double sunglasses = 0.05;
};

struct LookerProfile {
    std::string looker_id = "L1";
    double kappa = 0.6;  // fraction of the target angle covered by the head
    FeatureParams features;
    double pose_jitter_deg = 0.0;
    double pixel_noise = 0.0;
    double annotation_noise_deg = 0.0;
    std::uint64_t seed = 1;
};

/// Throws ParameterError on kappa outside [0, 1], negative sigmas, a bad
/// looker id or non-positive feature sizes.
void validate(const LookerProfile& profile);

inline constexpr int kRenderSize = 96;

struct RenderedPatches {
    GrayPatch face;  // 64x64, 8-bit quantized
    GrayPatch eyes;  // 64x16, 8-bit quantized
};

/// Full 96x96 render before region extraction, without noise.
GrayPatch render_face_image(const FeatureParams& features, const HeadPose& head, const EyeGazeCorrection& corr,
                            Condition condition);
/// Eye box in render pixels: fixed 48x12 box centered on the projected eye
/// midpoint, clamped to the image.
PixelBox eye_box(const FeatureParams& features, const HeadPose& head);

/// Deterministic in (noise_seed, inputs). Eyes-invisible gives a constant dark
/// eyes patch and sunglasses on the face; pixel noise is applied last and
/// never to the sunglasses patch.
RenderedPatches render_looker(const LookerProfile& profile, const HeadPose& head, const EyeGazeCorrection& corr,
                              Condition condition, std::uint64_t noise_seed);
inline RenderedPatches render_looker(const LookerProfile& profile, const HeadPose& head,
                                     const EyeGazeCorrection& corr, Condition condition) {
    return render_looker(profile, head, corr, condition, profile.seed);
}

struct SyntheticTrial {
    TrialRecord record;
    HeadPose true_head_pose;
    EyeGazeCorrection true_correction;
    GazeDirection true_gaze;
};

/// Counter-based seed for one trial: mix(profile seed, block id, trial index).
std::uint64_t trial_seed(std::uint64_t profile_seed, int block_id, int trial_index);

/// Head turns kappa of the way toward the target in azimuth and elevation
/// (plus jitter); the eyes supply the exact remainder. Noise draws happen in
/// the order pose jitter, annotation noise, pixel noise.
SyntheticTrial generate_trial(const LookerProfile& profile, const SceneLayout& scene, const Target& target,
                              Condition condition, int block_id = 0, int trial_index = 0);

struct Block {
    int block_id = 0;
    std::vector<SyntheticTrial> trials;  // 52, one per target
};

/// n_blocks blocks with ids first_block_id, first_block_id + 1, ...; each a
/// seeded permutation of all 52 targets. Throws ParameterError on
/// n_blocks < 1.
std::vector<Block> generate_blocks(const LookerProfile& profile, const SceneLayout& scene, int n_blocks,
                                   Condition condition, std::uint64_t seed, int first_block_id = 0);

/// Flattens blocks into a dataset in block then trial order.
Dataset to_dataset(const std::vector<Block>& blocks, const SceneLayout& scene);

}  // namespace gazelab
