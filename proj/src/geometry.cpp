#include "gazelab/geometry.hpp"

#include "gazelab/error.hpp"

#include <limits>
#include <string>

namespace gazelab {

GazeDirection GazeDirection::from_vector(const Vec3& v) {
    const double n = v.norm();
    if (!v.finite() || !(n > 0.0)) {
        throw DegenerateGeometryError("direction vector is zero or non-finite");
    }
    // Already-unit input is kept bit-for-bit so serialized directions reload exactly.
    if (std::abs(n - 1.0) <= 1e-14) {
        return GazeDirection(v);
    }
    return GazeDirection(Vec3{v.x / n, v.y / n, v.z / n});
}

GazeDirection GazeDirection::from_azimuth_elevation(double azimuth_deg, double elevation_deg) {
    const double az = deg2rad(azimuth_deg);
    const double el = deg2rad(elevation_deg);
    return from_vector({std::sin(az) * std::cos(el), std::sin(el), std::cos(az) * std::cos(el)});
}

double GazeDirection::azimuth_deg() const {
    const double az = rad2deg(std::atan2(unit_.x, unit_.z));
    return az == -180.0 ? 180.0 : az;
}

double GazeDirection::elevation_deg() const {
    return rad2deg(std::atan2(unit_.y, std::hypot(unit_.x, unit_.z)));
}

double GazeDirection::angle_to(const GazeDirection& other) const {
    return std::atan2(unit_.cross(other.unit_).norm(), unit_.dot(other.unit_));
}

TargetGrid::TargetGrid(std::array<double, kRows> radii_cm, double eye_height_cm, double column_step_deg)
    : radii_(radii_cm), eye_height_(eye_height_cm), column_step_(column_step_deg) {
    if (!(eye_height_cm > 0.0) || !(column_step_deg > 0.0) || column_step_deg * (kCols - 1) >= 180.0) {
        throw ParameterError("grid needs a positive eye height and a column step below 15 degrees");
    }
    for (int r = 0; r < kRows; ++r) {
        if (!(radii_[r] > 0.0) || (r > 0 && !(radii_[r] > radii_[r - 1]))) {
            throw ParameterError("grid radii must be positive and strictly increasing");
        }
    }
    targets_.reserve(kRows * kCols);
    for (int row = 1; row <= kRows; ++row) {
        for (int col = 1; col <= kCols; ++col) {
            const double az = deg2rad(column_azimuth_deg(col));
            const double radius = radii_[row - 1];
            targets_.push_back({{row, col}, {radius * std::sin(az), -eye_height_, radius * std::cos(az)}});
        }
    }
}

const Target& TargetGrid::at(int row, int col) const {
    if (!contains({row, col})) {
        throw ParameterError("target (" + std::to_string(row) + ", " + std::to_string(col) + ") outside the grid");
    }
    return targets_[(row - 1) * kCols + (col - 1)];
}

TargetGrid build_grid() {
    return TargetGrid(TargetGrid::kRadiiCm, TargetGrid::kEyeHeightCm, TargetGrid::kColumnStepDeg);
}

SceneLayout nominal_scene() {
    SceneLayout scene;
    const auto seat = [](double distance_cm, double azimuth_deg) {
        const double az = deg2rad(azimuth_deg);
        return Vec3{distance_cm * std::sin(az), 0.0, distance_cm * std::cos(az)};
    };
    scene.observer_positions = {seat(180.0, -47.7), seat(138.0, -28.6), seat(138.0, 28.6), seat(180.0, 47.7)};
    return scene;
}

GazeDirection gaze_to_target(const Vec3& eye_center, const Target& target) {
    const Vec3 d = target.position - eye_center;
    if (!(d.norm() > 0.0)) {
        throw DegenerateGeometryError("eye center coincides with target (" + std::to_string(target.row()) + ", " +
                                      std::to_string(target.col()) + ")");
    }
    return GazeDirection::from_vector(d);
}

double visual_angle_between(const Vec3& eye_center, const Target& a, const Target& b) {
    return rad2deg(gaze_to_target(eye_center, a).angle_to(gaze_to_target(eye_center, b)));
}

std::optional<Target> snap_to_target(const GazeDirection& direction, const Vec3& eye_center, const TargetGrid& grid) {
    const Vec3& d = direction.vector();
    const double drop = grid.table_y() - eye_center.y;
    if (!(d.y < 0.0) || !(drop < 0.0)) {
        return std::nullopt;
    }
    const double t = drop / d.y;
    const double hit_x = eye_center.x + t * d.x;
    const double hit_z = eye_center.z + t * d.z;
    if (!std::isfinite(hit_x) || !std::isfinite(hit_z)) {
        return std::nullopt;
    }

    const Target* best = nullptr;
    double best_d2 = std::numeric_limits<double>::infinity();
    for (const Target& target : grid.targets()) {
        const double dx = target.position.x - hit_x;
        const double dz = target.position.z - hit_z;
        const double d2 = dx * dx + dz * dz;
        if (d2 < best_d2) {  // strict: earlier (lower row, col) wins ties
            best_d2 = d2;
            best = &target;
        }
    }
    return *best;
}

}  // namespace gazelab
