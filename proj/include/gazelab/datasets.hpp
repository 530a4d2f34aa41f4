#pragma once

// Dataset manifests and raster I/O.
//
// A dataset directory holds:
//   manifest.tsv        header lines + one tab-separated record per trial
//   scene.txt           the scene layout the records refer to
//   patches/<trial_id>.face.pgm, patches/<trial_id>.eyes.pgm
//
// The byte-level format is documented in docs/manifest-format.md.

#include "gazelab/descriptor.hpp"
#include "gazelab/geometry.hpp"
#include "gazelab/orientation.hpp"

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace gazelab {

enum class Condition { EyesVisible, EyesInvisible };

/// "eyes-visible" / "eyes-invisible".
std::string_view to_string(Condition condition);
/// Accepts "eyes-visible", "visible", "eyes-invisible", "invisible".
/// Throws ParameterError otherwise.
Condition parse_condition(std::string_view text);

struct TrialRecord {
    std::string trial_id;
    std::string looker_id;
    int block_id = 0;
    Condition condition = Condition::EyesVisible;
    TargetId target;
    GrayPatch face_patch;
    GrayPatch eyes_patch;
    HeadPose annotated_head_pose;
    Vec3 eye_center;
    Vec3 target_position;

    /// Unit ray from eye_center to target_position.
    GazeDirection true_gaze() const { return GazeDirection::from_vector(target_position - eye_center); }

    friend bool operator==(const TrialRecord&, const TrialRecord&) = default;
};

struct Dataset {
    SceneLayout scene = nominal_scene();
    std::vector<TrialRecord> trials;
};

inline constexpr int kManifestVersion = 1;
inline constexpr std::string_view kManifestFileName = "manifest.tsv";
inline constexpr std::string_view kSceneFileName = "scene.txt";

/// Trial ids double as file names: [A-Za-z0-9._-], not starting with '.'.
bool valid_trial_id(std::string_view id);

/// Writes manifest, scene and patch files into `dir` (created if needed).
/// Patches are quantized to 8 bits. Output bytes depend only on the dataset.
/// Throws IoError on write failures and ValidationError on ids that cannot be
/// used as file names.
void write_manifest(const Dataset& dataset, const std::filesystem::path& dir);

/// Accepts the dataset directory or the manifest file itself. Every record is
/// validated eagerly; errors: MissingFileError, SchemaVersionError,
/// MalformedRecordError (with line number), NonUnitQuaternionError (naming
/// the trial), ValidationError (grid bounds, duplicate ids, bad condition).
Dataset read_manifest(const std::filesystem::path& path);

std::string scene_to_text(const SceneLayout& scene);
/// Throws MalformedRecordError on a bad scene file.
SceneLayout scene_from_text(std::string_view text);

/// Binary 8-bit PGM (P5). Values are rounded to the nearest of 256 levels.
void write_pgm(const GrayPatch& patch, const std::filesystem::path& path);
/// Binary PGM (P5) or PPM (P6), maxval <= 255; color is converted with
/// luminance weights 0.299/0.587/0.114. Throws MissingFileError or IoError.
GrayPatch read_pnm(const std::filesystem::path& path);

/// Rounds every intensity to the nearest k/255, matching a PGM round trip.
GrayPatch quantize_8bit(const GrayPatch& patch);

}  // namespace gazelab
