#include "gazelab/synthlab.hpp"

#include "gazelab/error.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>

namespace gazelab {

namespace {

constexpr int kSupersample = 4;
constexpr double kEyeBoxWidth = 48.0;
constexpr double kEyeBoxHeight = 12.0;

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// mt19937_64 is bit-specified by the standard; the distributions are not, so
// uniform and normal draws are derived here.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        while (u1 <= 0.0) {
            u1 = uniform();
        }
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        spare_ = r * std::sin(2.0 * kPi * u2);
        has_spare_ = true;
        return r * std::cos(2.0 * kPi * u2);
    }

    std::size_t below(std::size_t n) { return std::min(static_cast<std::size_t>(uniform() * n), n - 1); }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

Vec3 sphere_dir(double lon_deg, double lat_deg) {
    const double lon = deg2rad(lon_deg);
    const double lat = deg2rad(lat_deg);
    return {std::sin(lon) * std::cos(lat), std::sin(lat), std::cos(lon) * std::cos(lat)};
}

struct FeatureLayout {
    std::array<Vec3, 2> eyes;
    std::array<Vec3, 2> irises;
    Vec3 nose;
    Vec3 mouth;
    double cos_eye, cos_glasses, cos_iris, cos_nose, cos_mouth, sin_hair;
};

FeatureLayout layout_features(const FeatureParams& f, const EyeGazeCorrection& corr) {
    const double lon0 = f.feature_longitude_offset_deg;
    const double lat0 = f.feature_latitude_offset_deg;
    const EulerAngles eye_rot = to_euler(corr.offset);
    double shift_lon = f.iris_gain * eye_rot.yaw_deg;
    double shift_lat = f.iris_gain * eye_rot.pitch_deg;
    const double max_shift = f.eye_radius_deg - f.iris_radius_deg;
    const double len = std::hypot(shift_lon, shift_lat);
    if (len > max_shift) {
        shift_lon *= max_shift / len;
        shift_lat *= max_shift / len;
    }
    FeatureLayout L;
    for (int side = 0; side < 2; ++side) {
        const double lon = (side == 0 ? -f.eye_longitude_deg : f.eye_longitude_deg) + lon0;
        L.eyes[side] = sphere_dir(lon, f.eye_latitude_deg + lat0);
        L.irises[side] = sphere_dir(lon + shift_lon, f.eye_latitude_deg + lat0 + shift_lat);
    }
    L.nose = sphere_dir(lon0, f.nose_latitude_deg + lat0);
    L.mouth = sphere_dir(lon0, f.mouth_latitude_deg + lat0);
    L.cos_eye = std::cos(deg2rad(f.eye_radius_deg));
    L.cos_glasses = std::cos(deg2rad(1.25 * f.eye_radius_deg));
    L.cos_iris = std::cos(deg2rad(f.iris_radius_deg));
    L.cos_nose = std::cos(deg2rad(f.nose_radius_deg));
    L.cos_mouth = std::cos(deg2rad(f.mouth_radius_deg));
    L.sin_hair = std::sin(deg2rad(f.hair_latitude_deg + lat0));
    return L;
}

// Intensity of the head surface at head-frame unit direction h whose
// camera-facing normal component is nz.
double shade(const FeatureParams& f, const FeatureLayout& L, const Vec3& h, double nz, Condition condition) {
    for (int side = 0; side < 2; ++side) {
        const double d = h.dot(L.eyes[side]);
        if (condition == Condition::EyesInvisible) {
            if (d > L.cos_glasses) {
                return f.sunglasses;
            }
        } else if (d > L.cos_eye) {
            return h.dot(L.irises[side]) > L.cos_iris ? f.iris : f.eye_white;
        }
    }
    if (h.dot(L.nose) > L.cos_nose) {
        return f.nose;
    }
    if (h.dot(L.mouth) > L.cos_mouth) {
        return f.mouth;
    }
    if (h.y > L.sin_hair) {
        return f.hair;
    }
    return f.skin * (0.6 + 0.4 * nz);
}

}  // namespace

void validate(const LookerProfile& p) {
    if (!(p.kappa >= 0.0 && p.kappa <= 1.0)) {
        throw ParameterError("kappa must lie in [0, 1]");
    }
    if (!(p.pose_jitter_deg >= 0.0) || !(p.pixel_noise >= 0.0) || !(p.annotation_noise_deg >= 0.0)) {
        throw ParameterError("noise sigmas must be nonnegative");
    }
    if (!valid_trial_id(p.looker_id)) {
        throw ParameterError("invalid looker id '" + p.looker_id + "'");
    }
    const auto& f = p.features;
    if (!(f.head_radius_px > 0.0 && f.head_radius_px <= kRenderSize / 2.0) || !(f.eye_radius_deg > 0.0) ||
        !(f.iris_radius_deg > 0.0 && f.iris_radius_deg < f.eye_radius_deg) || !(f.nose_radius_deg > 0.0) ||
        !(f.mouth_radius_deg > 0.0) || !(f.iris_gain >= 0.0)) {
        throw ParameterError("feature sizes must be positive and the iris smaller than the eye");
    }
}

GrayPatch render_face_image(const FeatureParams& f, const HeadPose& head, const EyeGazeCorrection& corr,
                            Condition condition) {
    const FeatureLayout L = layout_features(f, corr);
    const UnitQuaternion to_head = head.orientation.inverse();
    const double c = kRenderSize / 2.0;
    const double r = f.head_radius_px;
    std::vector<double> px(static_cast<std::size_t>(kRenderSize) * kRenderSize);
    for (int v = 0; v < kRenderSize; ++v) {
        for (int u = 0; u < kRenderSize; ++u) {
            double acc = 0.0;
            for (int sy = 0; sy < kSupersample; ++sy) {
                for (int sx = 0; sx < kSupersample; ++sx) {
                    // Camera on +Z looking back at the looker: image right is +X.
                    const double x = (u + (sx + 0.5) / kSupersample - c) / r;
                    const double y = (c - (v + (sy + 0.5) / kSupersample)) / r;
                    const double rr = x * x + y * y;
                    if (rr >= 1.0) {
                        acc += f.background;
                        continue;
                    }
                    const double nz = std::sqrt(1.0 - rr);
                    acc += shade(f, L, to_head.rotate({x, y, nz}), nz, condition);
                }
            }
            px[static_cast<std::size_t>(v) * kRenderSize + u] = acc / (kSupersample * kSupersample);
        }
    }
    return GrayPatch(kRenderSize, kRenderSize, std::move(px));
}

PixelBox eye_box(const FeatureParams& f, const HeadPose& head) {
    const FeatureLayout L = layout_features(f, EyeGazeCorrection{});
    const Vec3 mid = head.orientation.rotate(0.5 * (L.eyes[0] + L.eyes[1]));
    const double c = kRenderSize / 2.0;
    const double u = c + f.head_radius_px * mid.x;
    const double v = c - f.head_radius_px * mid.y;
    return {std::clamp(u - kEyeBoxWidth / 2.0, 0.0, kRenderSize - kEyeBoxWidth),
            std::clamp(v - kEyeBoxHeight / 2.0, 0.0, kRenderSize - kEyeBoxHeight), kEyeBoxWidth, kEyeBoxHeight};
}

RenderedPatches render_looker(const LookerProfile& profile, const HeadPose& head, const EyeGazeCorrection& corr,
                              Condition condition, std::uint64_t noise_seed) {
    validate(profile);
    const RegionSizes sizes;
    const GrayPatch image = render_face_image(profile.features, head, corr, condition);
    const PixelBox face_box{0.0, 0.0, static_cast<double>(kRenderSize), static_cast<double>(kRenderSize)};
    RegionPatches regions = extract_regions(image, face_box, eye_box(profile.features, head), sizes);
    if (condition == Condition::EyesInvisible) {
        regions.eyes = GrayPatch::filled(sizes.eyes_width, sizes.eyes_height, profile.features.sunglasses);
    }

    Rng rng(noise_seed);
    const auto noisy = [&](const GrayPatch& p, bool add_noise) {
        std::vector<double> px = p.pixels();
        if (add_noise && profile.pixel_noise > 0.0) {
            for (double& v : px) {
                v = std::clamp(v + profile.pixel_noise * rng.normal(), 0.0, 1.0);
            }
        }
        return quantize_8bit(GrayPatch(p.width(), p.height(), std::move(px)));
    };
    RenderedPatches out;
    out.face = noisy(regions.face, true);
    out.eyes = noisy(regions.eyes, condition == Condition::EyesVisible);
    return out;
}

std::uint64_t trial_seed(std::uint64_t profile_seed, int block_id, int trial_index) {
    std::uint64_t h = splitmix64(profile_seed);
    h = splitmix64(h ^ static_cast<std::uint64_t>(static_cast<std::uint32_t>(block_id)));
    return splitmix64(h ^ (static_cast<std::uint64_t>(static_cast<std::uint32_t>(trial_index)) << 32));
}

SyntheticTrial generate_trial(const LookerProfile& profile, const SceneLayout& scene, const Target& target,
                              Condition condition, int block_id, int trial_index) {
    validate(profile);
    const Vec3& eye = scene.looker_eye_center;
    const GazeDirection gaze = gaze_to_target(eye, target);
    Rng rng(trial_seed(profile.seed, block_id, trial_index));

    const double j_yaw = profile.pose_jitter_deg * rng.normal();
    const double j_pitch = profile.pose_jitter_deg * rng.normal();
    const double j_roll = profile.pose_jitter_deg * rng.normal();
    EulerAngles head_angles{profile.kappa * gaze.azimuth_deg() + j_yaw, profile.kappa * gaze.elevation_deg() + j_pitch,
                            j_roll};
    const HeadPose head{from_euler(head_angles)};
    const EyeGazeCorrection corr = correction_from(head, gaze);

    const double n_yaw = profile.annotation_noise_deg * rng.normal();
    const double n_pitch = profile.annotation_noise_deg * rng.normal();
    const double n_roll = profile.annotation_noise_deg * rng.normal();
    const HeadPose annotated{from_euler(
        {head_angles.yaw_deg + n_yaw, head_angles.pitch_deg + n_pitch, head_angles.roll_deg + n_roll})};

    RenderedPatches patches = render_looker(profile, head, corr, condition, rng.next_u64());

    SyntheticTrial out;
    char id[64];
    std::snprintf(id, sizeof id, "-b%d-t%02d", block_id, trial_index);
    out.record.trial_id = profile.looker_id + id;
    out.record.looker_id = profile.looker_id;
    out.record.block_id = block_id;
    out.record.condition = condition;
    out.record.target = target.id;
    out.record.face_patch = std::move(patches.face);
    out.record.eyes_patch = std::move(patches.eyes);
    out.record.annotated_head_pose = annotated;
    out.record.eye_center = eye;
    out.record.target_position = target.position;
    out.true_head_pose = head;
    out.true_correction = corr;
    out.true_gaze = gaze;
    return out;
}

std::vector<Block> generate_blocks(const LookerProfile& profile, const SceneLayout& scene, int n_blocks,
                                   Condition condition, std::uint64_t seed, int first_block_id) {
    if (n_blocks < 1) {
        throw ParameterError("need at least one block");
    }
    if (first_block_id < 0) {
        throw ParameterError("block ids must be nonnegative");
    }
    validate(profile);
    std::vector<Block> blocks;
    for (int b = 0; b < n_blocks; ++b) {
        Block block;
        block.block_id = first_block_id + b;
        std::vector<std::size_t> order(scene.grid.targets().size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        Rng rng(splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(block.block_id))));
        for (std::size_t i = order.size() - 1; i > 0; --i) {
            std::swap(order[i], order[rng.below(i + 1)]);
        }
        for (std::size_t i = 0; i < order.size(); ++i) {
            block.trials.push_back(generate_trial(profile, scene, scene.grid.targets()[order[i]], condition,
                                                  block.block_id, static_cast<int>(i)));
        }
        blocks.push_back(std::move(block));
    }
    return blocks;
}

Dataset to_dataset(const std::vector<Block>& blocks, const SceneLayout& scene) {
    Dataset ds;
    ds.scene = scene;
    for (const auto& block : blocks) {
        for (const auto& t : block.trials) {
            ds.trials.push_back(t.record);
        }
    }
    return ds;
}

}  // namespace gazelab
