// Earth (E) and body (B) frames, Euler rotations and frame transforms.
//
// Conventions used throughout the library:
//   E: x north, y east, z down (toward the center of the earth).
//   B: x forward, y right, z down through the belly.
//   Altitude above the origin is therefore -p.z().
//   Rotor thrust acts along -b_z; a positive thrust magnitude lifts the vehicle.
//   R = R_yaw * R_pitch * R_roll maps body-frame vectors into the earth frame.
#pragma once

#include <Eigen/Core>

namespace pfsim {

using Vec3 = Eigen::Vector3d;
using RotationMatrix = Eigen::Matrix3d;

/// Reject |cos(pitch)| below this as gimbal lock.
inline constexpr double kGimbalGuard = 1e-6;

struct Attitude {
    double roll = 0.0;   // about b_x [rad]
    double pitch = 0.0;  // about b_y [rad]
    double yaw = 0.0;    // about b_z [rad]

    bool operator==(const Attitude&) const = default;
};

bool is_finite(const Vec3& v);

/// Wraps an angle into (-pi, pi].
double wrap_angle(double angle);

/// Wraps all three angles into (-pi, pi].
Attitude normalized(const Attitude& att);

/// Throws GimbalLockError when |cos(pitch)| < kGimbalGuard, InvalidArgument
/// when any angle is non-finite.
void check_attitude(const Attitude& att);

RotationMatrix rot_yaw(double yaw);
RotationMatrix rot_roll(double roll);
RotationMatrix rot_pitch(double pitch);

/// Closed-form R_yaw * R_pitch * R_roll (body -> earth).
RotationMatrix rot_full(const Attitude& att);

Vec3 body_to_earth(const Vec3& v, const Attitude& att);
Vec3 earth_to_body(const Vec3& v, const Attitude& att);

}  // namespace pfsim
