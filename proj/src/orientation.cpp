#include "gazelab/orientation.hpp"

#include "gazelab/error.hpp"

#include <cmath>

namespace gazelab {

UnitQuaternion UnitQuaternion::from_components(double w, double x, double y, double z) {
    const double n = std::sqrt(w * w + x * x + y * y + z * z);
    if (!std::isfinite(n) || !(n > 0.0)) {
        throw ParameterError("quaternion is zero or non-finite");
    }
    // Already-unit input is kept bit-for-bit so normalization is idempotent.
    if (std::abs(n - 1.0) > 1e-14) {
        w /= n;
        x /= n;
        y /= n;
        z /= n;
    }
    bool flip = w < 0.0;
    if (w == 0.0) {
        flip = x != 0.0 ? x < 0.0 : (y != 0.0 ? y < 0.0 : z < 0.0);
    }
    if (flip) {
        return {-w, -x, -y, -z};
    }
    return {w, x, y, z};
}

UnitQuaternion UnitQuaternion::from_axis_angle(const Vec3& axis, double angle_rad) {
    const double n = axis.norm();
    if (!(n > 0.0)) {
        throw ParameterError("rotation axis is zero");
    }
    const double s = std::sin(0.5 * angle_rad) / n;
    return from_components(std::cos(0.5 * angle_rad), axis.x * s, axis.y * s, axis.z * s);
}

UnitQuaternion UnitQuaternion::inverse() const { return {w_, -x_, -y_, -z_}; }

UnitQuaternion operator*(const UnitQuaternion& a, const UnitQuaternion& b) {
    return UnitQuaternion::from_components(a.w_ * b.w_ - a.x_ * b.x_ - a.y_ * b.y_ - a.z_ * b.z_,
                                           a.w_ * b.x_ + a.x_ * b.w_ + a.y_ * b.z_ - a.z_ * b.y_,
                                           a.w_ * b.y_ - a.x_ * b.z_ + a.y_ * b.w_ + a.z_ * b.x_,
                                           a.w_ * b.z_ + a.x_ * b.y_ - a.y_ * b.x_ + a.z_ * b.w_);
}

Vec3 UnitQuaternion::rotate(const Vec3& v) const {
    // v + 2w (u x v) + 2 u x (u x v)
    const Vec3 u{x_, y_, z_};
    const Vec3 t = 2.0 * u.cross(v);
    return v + w_ * t + u.cross(t);
}

double UnitQuaternion::angle() const {
    return 2.0 * std::atan2(std::sqrt(x_ * x_ + y_ * y_ + z_ * z_), std::abs(w_));
}

double angular_distance(const UnitQuaternion& a, const UnitQuaternion& b) { return (a.inverse() * b).angle(); }

namespace {

UnitQuaternion about_y(double deg) { return UnitQuaternion::from_axis_angle({0, 1, 0}, deg2rad(deg)); }
UnitQuaternion about_x(double deg) { return UnitQuaternion::from_axis_angle({1, 0, 0}, deg2rad(deg)); }
UnitQuaternion about_z(double deg) { return UnitQuaternion::from_axis_angle({0, 0, 1}, deg2rad(deg)); }

}  // namespace

// A positive rotation about +X tilts +Z toward -Y, hence the negated pitch.
UnitQuaternion from_euler(const EulerAngles& a) {
    return about_y(a.yaw_deg) * about_x(-a.pitch_deg) * about_z(a.roll_deg);
}

EulerAngles to_euler(const UnitQuaternion& q) {
    const GazeDirection fwd = GazeDirection::from_vector(q.rotate(kForwardAxis));
    EulerAngles out;
    out.yaw_deg = fwd.azimuth_deg();
    out.pitch_deg = fwd.elevation_deg();
    const UnitQuaternion twist = (about_y(out.yaw_deg) * about_x(-out.pitch_deg)).inverse() * q;
    out.roll_deg = rad2deg(2.0 * std::atan2(twist.z(), twist.w()));
    if (out.roll_deg > 180.0) {
        out.roll_deg -= 360.0;
    }
    return out;
}

GazeDirection HeadPose::forward() const { return GazeDirection::from_vector(orientation.rotate(kForwardAxis)); }

UnitQuaternion rotation_to(const GazeDirection& gaze) {
    return from_euler({gaze.azimuth_deg(), gaze.elevation_deg(), 0.0});
}

GazeDirection compose(const HeadPose& head, const EyeGazeCorrection& corr) {
    return GazeDirection::from_vector((head.orientation * corr.offset).rotate(kForwardAxis));
}

EyeGazeCorrection correction_from(const HeadPose& head, const GazeDirection& gaze) {
    return {head.orientation.inverse() * rotation_to(gaze)};
}

UnitQuaternion weighted_average(std::span<const UnitQuaternion> quats, std::span<const double> weights) {
    if (quats.empty()) {
        throw EmptyInputError("weighted_average of an empty list");
    }
    if (quats.size() != weights.size()) {
        throw ParameterError("weighted_average needs one weight per quaternion");
    }
    std::size_t anchor = 0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        if (!std::isfinite(weights[i]) || weights[i] < 0.0) {
            throw ParameterError("weights must be finite and nonnegative");
        }
        if (weights[i] > weights[anchor]) {
            anchor = i;
        }
    }
    if (!(weights[anchor] > 0.0)) {
        throw ParameterError("weighted_average needs at least one positive weight");
    }

    const UnitQuaternion& ref = quats[anchor];
    double w = 0.0, x = 0.0, y = 0.0, z = 0.0;
    for (std::size_t i = 0; i < quats.size(); ++i) {
        const UnitQuaternion& q = quats[i];
        const double dot = q.w() * ref.w() + q.x() * ref.x() + q.y() * ref.y() + q.z() * ref.z();
        const double s = dot < 0.0 ? -weights[i] : weights[i];
        w += s * q.w();
        x += s * q.x();
        y += s * q.y();
        z += s * q.z();
    }
    return UnitQuaternion::from_components(w, x, y, z);
}

}  // namespace gazelab
