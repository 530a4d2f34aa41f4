#pragma once

// Scene geometry for the free-looking setup: a 52-object concentric target
// array on a table, the looker's eye center, and four observer seats.
//
// Frame: origin at the looker's eye center, +Z horizontal toward the grid
// center (the looker's resting direction), +Y up, +X to the looker's right.
// The table plane is y = -35 cm. Azimuth is positive toward +X, elevation
// positive toward +Y. Lengths are centimeters, angles degrees unless noted.

#include <array>
#include <cmath>
#include <numbers>
#include <optional>
#include <vector>

namespace gazelab {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double deg2rad(double deg) { return deg * kPi / 180.0; }
inline constexpr double rad2deg(double rad) { return rad * 180.0 / kPi; }

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    friend Vec3 operator+(const Vec3& a, const Vec3& b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
    friend Vec3 operator-(const Vec3& a, const Vec3& b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
    friend Vec3 operator*(double s, const Vec3& v) { return {s * v.x, s * v.y, s * v.z}; }
    friend bool operator==(const Vec3&, const Vec3&) = default;

    double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
    Vec3 cross(const Vec3& o) const { return {y * o.z - z * o.y, z * o.x - x * o.z, x * o.y - y * o.x}; }
    double norm() const { return std::sqrt(dot(*this)); }
    bool finite() const { return std::isfinite(x) && std::isfinite(y) && std::isfinite(z); }
};

/// A unit 3D ray direction. Construction always normalizes.
class GazeDirection {
public:
    GazeDirection() = default;  // +Z, the resting direction

    /// Throws DegenerateGeometryError for a zero or non-finite vector.
    static GazeDirection from_vector(const Vec3& v);
    static GazeDirection from_azimuth_elevation(double azimuth_deg, double elevation_deg);

    const Vec3& vector() const { return unit_; }
    /// In (-180, 180].
    double azimuth_deg() const;
    /// In [-90, 90].
    double elevation_deg() const;

    /// Angle between the two rays in radians, accurate near 0 and pi.
    double angle_to(const GazeDirection& other) const;

    friend bool operator==(const GazeDirection&, const GazeDirection&) = default;

private:
    explicit GazeDirection(const Vec3& unit) : unit_(unit) {}
    Vec3 unit_{0.0, 0.0, 1.0};
};

struct TargetId {
    int row = 0;  // 1..4, nearest arc first
    int col = 0;  // 1..13, column 1 on the looker's left
    friend bool operator==(const TargetId&, const TargetId&) = default;
    friend auto operator<=>(const TargetId&, const TargetId&) = default;
};

struct Target {
    TargetId id;
    Vec3 position;

    int row() const { return id.row; }
    int col() const { return id.col; }
};

class TargetGrid {
public:
    static constexpr int kRows = 4;
    static constexpr int kCols = 13;
    static constexpr int kCenterCol = 7;
    static constexpr double kEyeHeightCm = 35.0;
    static constexpr double kColumnStepDeg = 10.0;
    static constexpr std::array<double, kRows> kRadiiCm{29.4, 49.7, 60.6, 96.1};

    TargetGrid(std::array<double, kRows> radii_cm, double eye_height_cm, double column_step_deg);

    const std::vector<Target>& targets() const { return targets_; }
    const std::array<double, kRows>& radii_cm() const { return radii_; }
    double eye_height_cm() const { return eye_height_; }
    double column_step_deg() const { return column_step_; }
    /// y coordinate of the table surface.
    double table_y() const { return -eye_height_; }

    /// Throws ParameterError when (row, col) is outside the grid.
    const Target& at(int row, int col) const;
    const Target& at(TargetId id) const { return at(id.row, id.col); }
    static bool contains(TargetId id) { return id.row >= 1 && id.row <= kRows && id.col >= 1 && id.col <= kCols; }

    /// Table-surface azimuth of a column, (col - 7) * step.
    double column_azimuth_deg(int col) const { return (col - kCenterCol) * column_step_; }

private:
    std::array<double, kRows> radii_;
    double eye_height_;
    double column_step_;
    std::vector<Target> targets_;  // row-major: (1,1), (1,2), ... (4,13)
};

/// The nominal grid: radii 29.4/49.7/60.6/96.1 cm, eyes 35 cm above the table,
/// 13 columns 10 degrees apart on the table surface.
TargetGrid build_grid();

struct SceneLayout {
    TargetGrid grid = build_grid();
    Vec3 looker_eye_center{};
    /// Positions 1..4, left to right from the looker's point of view.
    std::array<Vec3, 4> observer_positions{};
};

/// Nominal scene: position 1 at 180 cm / 47.7 deg to the looker's left,
/// position 2 at 138 cm / 28.6 deg, positions 3 and 4 mirrored.
SceneLayout nominal_scene();

/// Throws DegenerateGeometryError when the points coincide.
GazeDirection gaze_to_target(const Vec3& eye_center, const Target& target);

/// Angle in degrees between the rays from eye_center to a and to b.
double visual_angle_between(const Vec3& eye_center, const Target& a, const Target& b);

/// Intersects the ray with the table plane and returns the target closest to
/// the hit point (ties: lowest row, then lowest column). Empty when the ray
/// does not reach the table in the forward direction.
std::optional<Target> snap_to_target(const GazeDirection& direction, const Vec3& eye_center,
                                     const TargetGrid& grid);

}  // namespace gazelab
