#pragma once

// Unit-quaternion algebra for head pose and eye-gaze correction.
//
// Euler convention: intrinsic yaw about +Y, then pitch about the rotated X
// axis, then roll about the rotated Z axis. Positive yaw turns +Z toward +X,
// positive pitch raises +Z toward +Y, so a zero-roll pose with (yaw, pitch)
// looks along azimuth = yaw, elevation = pitch.

#include "gazelab/geometry.hpp"

#include <span>

namespace gazelab {

class UnitQuaternion {
public:
    UnitQuaternion() = default;  // identity

    /// Normalizes and canonicalizes the sign (w >= 0; on w == 0 the first
    /// nonzero component is made positive). Throws ParameterError on a zero or
    /// non-finite input.
    static UnitQuaternion from_components(double w, double x, double y, double z);
    static UnitQuaternion from_axis_angle(const Vec3& axis, double angle_rad);
    static UnitQuaternion identity() { return {}; }

    double w() const { return w_; }
    double x() const { return x_; }
    double y() const { return y_; }
    double z() const { return z_; }

    UnitQuaternion inverse() const;
    Vec3 rotate(const Vec3& v) const;
    /// Rotation angle in radians, in [0, pi].
    double angle() const;

    friend UnitQuaternion operator*(const UnitQuaternion& a, const UnitQuaternion& b);
    friend bool operator==(const UnitQuaternion&, const UnitQuaternion&) = default;

private:
    UnitQuaternion(double w, double x, double y, double z) : w_(w), x_(x), y_(y), z_(z) {}
    double w_ = 1.0, x_ = 0.0, y_ = 0.0, z_ = 0.0;
};

/// Rotation angle between two orientations, radians.
double angular_distance(const UnitQuaternion& a, const UnitQuaternion& b);

struct EulerAngles {
    double yaw_deg = 0.0;
    double pitch_deg = 0.0;
    double roll_deg = 0.0;
};

UnitQuaternion from_euler(const EulerAngles& angles);
EulerAngles to_euler(const UnitQuaternion& q);

struct HeadPose {
    UnitQuaternion orientation;

    static HeadPose from_euler(double yaw_deg, double pitch_deg, double roll_deg) {
        return {gazelab::from_euler({yaw_deg, pitch_deg, roll_deg})};
    }
    EulerAngles euler() const { return to_euler(orientation); }
    friend bool operator==(const HeadPose&, const HeadPose&) = default;
    /// Where the head's +Z axis points.
    GazeDirection forward() const;
};

/// Relative rotation carried by the eyes on top of the head pose.
struct EyeGazeCorrection {
    UnitQuaternion offset;
    friend bool operator==(const EyeGazeCorrection&, const EyeGazeCorrection&) = default;
};

inline const Vec3 kForwardAxis{0.0, 0.0, 1.0};

/// Zero-roll rotation taking +Z to the gaze: from_euler(azimuth, elevation, 0).
/// A gaze along -Z maps to a 180 degree turn about +Y.
UnitQuaternion rotation_to(const GazeDirection& gaze);

/// Final gaze: (head * correction) applied to +Z.
GazeDirection compose(const HeadPose& head, const EyeGazeCorrection& corr);

/// head^-1 * rotation_to(gaze), so compose(head, result) reproduces gaze.
EyeGazeCorrection correction_from(const HeadPose& head, const GazeDirection& gaze);

/// Sign-aligns every quaternion to the highest-weight one (first on ties),
/// sums component-wise with the weights and renormalizes. Throws
/// EmptyInputError on an empty list, ParameterError on mismatched lengths,
/// negative or non-finite weights, or when no weight is positive.
UnitQuaternion weighted_average(std::span<const UnitQuaternion> quats, std::span<const double> weights);

}  // namespace gazelab
