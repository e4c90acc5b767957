#include "pfsim/frames.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "pfsim/errors.hpp"

namespace pfsim {

namespace {

void require_finite(double angle, const char* name) {
    if (!std::isfinite(angle)) {
        throw InvalidArgument(std::string(name) + " must be finite");
    }
}

}  // namespace

bool is_finite(const Vec3& v) {
    return std::isfinite(v.x()) && std::isfinite(v.y()) && std::isfinite(v.z());
}

double wrap_angle(double angle) {
    constexpr double kPi = std::numbers::pi;
    if (angle > -kPi && angle <= kPi) {
        return angle;
    }
    double wrapped = std::remainder(angle, 2.0 * kPi);  // [-pi, pi]
    if (wrapped <= -kPi) {
        wrapped += 2.0 * kPi;
    }
    return wrapped;
}

Attitude normalized(const Attitude& att) {
    return {wrap_angle(att.roll), wrap_angle(att.pitch), wrap_angle(att.yaw)};
}

void check_attitude(const Attitude& att) {
    require_finite(att.roll, "roll");
    require_finite(att.pitch, "pitch");
    require_finite(att.yaw, "yaw");
    if (std::abs(std::cos(att.pitch)) < kGimbalGuard) {
        throw GimbalLockError(att.pitch);
    }
}

RotationMatrix rot_yaw(double yaw) {
    require_finite(yaw, "yaw");
    const double c = std::cos(yaw);
    const double s = std::sin(yaw);
    RotationMatrix r;
    r << c, -s, 0.0,
         s,  c, 0.0,
         0.0, 0.0, 1.0;
    return r;
}

RotationMatrix rot_roll(double roll) {
    require_finite(roll, "roll");
    const double c = std::cos(roll);
    const double s = std::sin(roll);
    RotationMatrix r;
    r << 1.0, 0.0, 0.0,
         0.0, c, -s,
         0.0, s,  c;
    return r;
}

RotationMatrix rot_pitch(double pitch) {
    require_finite(pitch, "pitch");
    const double c = std::cos(pitch);
    const double s = std::sin(pitch);
    RotationMatrix r;
    r << c, 0.0, s,
         0.0, 1.0, 0.0,
         -s, 0.0, c;
    return r;
}

RotationMatrix rot_full(const Attitude& att) {
    check_attitude(att);
    const double sr = std::sin(att.roll), cr = std::cos(att.roll);
    const double sp = std::sin(att.pitch), cp = std::cos(att.pitch);
    const double sy = std::sin(att.yaw), cy = std::cos(att.yaw);
    RotationMatrix r;
    r << cy * cp, cy * sr * sp - sy * cr, cy * cr * sp + sy * sr,
         sy * cp, sy * sr * sp + cy * cr, sy * cr * sp - cy * sr,
         -sp,     sr * cp,                cr * cp;
    return r;
}

Vec3 body_to_earth(const Vec3& v, const Attitude& att) {
    return rot_full(att) * v;
}

Vec3 earth_to_body(const Vec3& v, const Attitude& att) {
    return rot_full(att).transpose() * v;
}

}  // namespace pfsim
