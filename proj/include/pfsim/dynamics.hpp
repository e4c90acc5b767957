// Quadcopter plant models.
//
// Rigid-body model: rotor forces/moments and Newton-Euler accelerations in the
// body frame, integrated with fixed-step RK4. Euler-angle rates are identified
// with body rates (small-angle regime), so the gyroscopic terms read
// theta_dot * psi_dot etc. exactly as in the classic quadcopter EOM.
//
// Two reduced plants sit on top for controller experiments: a first-order
// velocity lag and a cascaded velocity -> attitude -> motor loop that drives
// the rigid-body model.
#pragma once

#include <array>

#include "pfsim/frames.hpp"

namespace pfsim {

struct QuadParams {
    double mass = 0.43;              // kg
    double gravity = 9.81;           // m/s^2
    double ixx = 2.24e-3;            // kg m^2
    double iyy = 2.24e-3;            // kg m^2
    double izz = 4.5e-3;             // kg m^2
    double thrust_coeff = 8.14e-6;   // N s^2/rad^2, hover at ~360 rad/s
    double moment_coeff = 1.6e-7;    // N m s^2/rad^2
    double arm_length = 0.178;       // m
    double max_motor_speed = 700.0;  // rad/s

    /// Throws ValidationError naming the first non-positive field.
    void validate() const;

    /// Motor speed at which 4 k_T Omega^2 = m g.
    double hover_speed() const;

    bool operator==(const QuadParams&) const = default;
};

/// Motor angular speeds Omega_1..Omega_4 [rad/s].
struct MotorCommand {
    std::array<double, 4> speed{};

    static MotorCommand uniform(double omega) { return {{omega, omega, omega, omega}}; }
};

struct RigidBodyState {
    Vec3 position = Vec3::Zero();    // earth frame [m]
    Vec3 velocity = Vec3::Zero();    // earth frame [m/s]
    Attitude attitude{};
    Vec3 body_rates = Vec3::Zero();  // (phi_dot, theta_dot, psi_dot) [rad/s]

    bool operator==(const RigidBodyState&) const = default;
};

bool is_finite(const RigidBodyState& s);

struct Wrench {
    Vec3 force = Vec3::Zero();   // body frame [N]
    Vec3 torque = Vec3::Zero();  // body frame [N m]
};

struct Accelerations {
    Vec3 linear = Vec3::Zero();   // body frame [m/s^2]
    Vec3 angular = Vec3::Zero();  // body frame [rad/s^2]
};

/// Which frame gravity is expressed in before the body acceleration is
/// rotated to the earth frame.
///
/// kBody keeps the small-angle model verbatim: (0, 0, m g) is added in the
/// body frame. kEarth adds gravity after rotation, which is required for
/// tilt-to-translate flight in the cascaded plant.
enum class GravityFrame { kBody, kEarth };

Vec3 sum_forces(const MotorCommand& cmd, const QuadParams& params);
Vec3 sum_torques(const MotorCommand& cmd, const QuadParams& params);

/// Body-frame linear and angular acceleration.
Accelerations accelerations(const RigidBodyState& state, const MotorCommand& cmd,
                            const QuadParams& params,
                            GravityFrame gravity = GravityFrame::kBody);

/// Largest accepted integration step.
inline constexpr double kMaxStep = 0.05;

/// One RK4 step of the 12-state model with the command held constant.
/// Throws InvalidArgument for dt outside (0, kMaxStep] and GimbalLockError if
/// any stage reaches the singular pitch band.
RigidBodyState step(const RigidBodyState& state, const MotorCommand& cmd,
                    const QuadParams& params, double dt,
                    GravityFrame gravity = GravityFrame::kBody);

// ---------------------------------------------------------------------------
// First-order velocity lag plant

struct VelocityPlantConfig {
    Vec3 time_constant{1.5, 1.5, 1.5};  // per body axis [s]
    double max_speed = 2.0;             // |v| ceiling [m/s]
    double yaw_time_constant = 0.3;     // yaw-rate lag [s]
    double max_yaw_rate = 1.5;          // [rad/s]

    void validate() const;
    bool operator==(const VelocityPlantConfig&) const = default;
};

/// Each body axis relaxes toward the command with v_dot = (v_cmd - v) / tau.
/// The command is held over the step and the response is integrated in
/// closed form. Roll and pitch stay at zero.
RigidBodyState velocity_plant_step(const RigidBodyState& state, const Vec3& v_cmd_body,
                                   double yaw_rate_cmd, const VelocityPlantConfig& cfg,
                                   double dt);

// ---------------------------------------------------------------------------
// Cascaded plant: velocity loop -> tilt -> attitude PD -> motor mixing

struct CascadedGains {
    double velocity_gain = 2.0;       // horizontal accel per m/s error [1/s]
    double vertical_gain = 3.0;       // vertical accel per m/s error [1/s]
    double max_tilt = 0.35;           // [rad]
    double attitude_kp = 100.0;       // [1/s^2]
    double attitude_kd = 20.0;        // [1/s]
    double yaw_rate_gain = 8.0;       // [1/s]

    void validate() const;
    bool operator==(const CascadedGains&) const = default;
};

/// Squared motor speeds that reproduce a collective thrust (along -b_z) and a
/// body torque. Entries may be negative when the request is infeasible.
std::array<double, 4> mix_squared(double thrust, const Vec3& torque,
                                  const QuadParams& params);

struct MixResult {
    MotorCommand command;
    bool saturated = false;  // some Omega^2 was clamped into [0, Omega_max^2]
};

MixResult mix(double thrust, const Vec3& torque, const QuadParams& params);

struct CascadedStepResult {
    RigidBodyState state;
    MotorCommand motors;
    bool saturated = false;
};

CascadedStepResult cascaded_plant_step(const RigidBodyState& state, const Vec3& v_cmd_body,
                                       double yaw_rate_cmd, const CascadedGains& gains,
                                       const QuadParams& params, double dt);

}  // namespace pfsim
