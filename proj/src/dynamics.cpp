#include "pfsim/dynamics.hpp"

#include <algorithm>
#include <cmath>

#include "pfsim/errors.hpp"

namespace pfsim {

namespace {

void require_positive(double value, const char* field) {
    if (!(value > 0.0) || !std::isfinite(value)) {
        throw ValidationError(field, "must be finite and > 0");
    }
}

double sum_squares(const MotorCommand& cmd) {
    double total = 0.0;
    for (double w : cmd.speed) {
        total += w * w;
    }
    return total;
}

// Time derivative of the 12-dimensional state.
struct StateRate {
    Vec3 position;
    Vec3 velocity;
    Vec3 attitude;
    Vec3 body_rates;
};

Vec3 attitude_vector(const Attitude& a) { return {a.roll, a.pitch, a.yaw}; }

RigidBodyState advance(const RigidBodyState& s, const StateRate& k, double h) {
    RigidBodyState out;
    out.position = s.position + h * k.position;
    out.velocity = s.velocity + h * k.velocity;
    const Vec3 att = attitude_vector(s.attitude) + h * k.attitude;
    out.attitude = {att.x(), att.y(), att.z()};
    out.body_rates = s.body_rates + h * k.body_rates;
    return out;
}

StateRate derivative(const RigidBodyState& s, const MotorCommand& cmd,
                     const QuadParams& params, GravityFrame gravity) {
    const Accelerations acc = accelerations(s, cmd, params, gravity);
    StateRate rate;
    rate.position = s.velocity;
    rate.velocity = body_to_earth(acc.linear, s.attitude);
    rate.attitude = s.body_rates;
    rate.body_rates = acc.angular;
    return rate;
}

void require_step(double dt) {
    if (!(dt > 0.0) || dt > kMaxStep || !std::isfinite(dt)) {
        throw InvalidArgument("dt must lie in (0, " + std::to_string(kMaxStep) + "]");
    }
}

}  // namespace

void QuadParams::validate() const {
    require_positive(mass, "params.m");
    require_positive(gravity, "params.g");
    require_positive(ixx, "params.ixx");
    require_positive(iyy, "params.iyy");
    require_positive(izz, "params.izz");
    require_positive(thrust_coeff, "params.k_t");
    require_positive(moment_coeff, "params.k_m");
    require_positive(arm_length, "params.l");
    require_positive(max_motor_speed, "params.omega_max");
}

double QuadParams::hover_speed() const {
    return std::sqrt(mass * gravity / (4.0 * thrust_coeff));
}

bool is_finite(const RigidBodyState& s) {
    return is_finite(s.position) && is_finite(s.velocity) && is_finite(s.body_rates) &&
           std::isfinite(s.attitude.roll) && std::isfinite(s.attitude.pitch) &&
           std::isfinite(s.attitude.yaw);
}

Vec3 sum_forces(const MotorCommand& cmd, const QuadParams& params) {
    return {0.0, 0.0, params.mass * params.gravity - params.thrust_coeff * sum_squares(cmd)};
}

Vec3 sum_torques(const MotorCommand& cmd, const QuadParams& params) {
    const auto& w = cmd.speed;
    const double w1 = w[0] * w[0], w2 = w[1] * w[1], w3 = w[2] * w[2], w4 = w[3] * w[3];
    return {params.thrust_coeff * (w3 - w4) * params.arm_length,
            params.thrust_coeff * (w1 - w2) * params.arm_length,
            -params.moment_coeff * (w1 + w2 - w3 - w4)};
}

Accelerations accelerations(const RigidBodyState& state, const MotorCommand& cmd,
                            const QuadParams& params, GravityFrame gravity) {
    const auto& w = cmd.speed;
    const double w1 = w[0] * w[0], w2 = w[1] * w[1], w3 = w[2] * w[2], w4 = w[3] * w[3];
    const double roll_rate = state.body_rates.x();
    const double pitch_rate = state.body_rates.y();
    const double yaw_rate = state.body_rates.z();
    const double thrust_accel = params.thrust_coeff / params.mass * (w1 + w2 + w3 + w4);

    Accelerations acc;
    if (gravity == GravityFrame::kBody) {
        acc.linear = {0.0, 0.0, params.gravity - thrust_accel};
    } else {
        acc.linear = Vec3{0.0, 0.0, -thrust_accel} +
                     earth_to_body(Vec3{0.0, 0.0, params.gravity}, state.attitude);
    }
    acc.angular.x() = (params.thrust_coeff * (w3 - w4) * params.arm_length -
                       pitch_rate * yaw_rate * (params.izz - params.iyy)) /
                      params.ixx;
    acc.angular.y() = (params.thrust_coeff * (w1 - w2) * params.arm_length -
                       roll_rate * yaw_rate * (params.ixx - params.izz)) /
                      params.iyy;
    acc.angular.z() = (-params.moment_coeff * (w1 + w2 - w3 - w4) -
                       pitch_rate * roll_rate * (params.iyy - params.ixx)) /
                      params.izz;
    return acc;
}

RigidBodyState step(const RigidBodyState& state, const MotorCommand& cmd,
                    const QuadParams& params, double dt, GravityFrame gravity) {
    require_step(dt);
    check_attitude(state.attitude);

    const StateRate k1 = derivative(state, cmd, params, gravity);
    const StateRate k2 = derivative(advance(state, k1, 0.5 * dt), cmd, params, gravity);
    const StateRate k3 = derivative(advance(state, k2, 0.5 * dt), cmd, params, gravity);
    const StateRate k4 = derivative(advance(state, k3, dt), cmd, params, gravity);

    StateRate blend;
    blend.position = (k1.position + 2.0 * k2.position + 2.0 * k3.position + k4.position) / 6.0;
    blend.velocity = (k1.velocity + 2.0 * k2.velocity + 2.0 * k3.velocity + k4.velocity) / 6.0;
    blend.attitude = (k1.attitude + 2.0 * k2.attitude + 2.0 * k3.attitude + k4.attitude) / 6.0;
    blend.body_rates =
        (k1.body_rates + 2.0 * k2.body_rates + 2.0 * k3.body_rates + k4.body_rates) / 6.0;

    RigidBodyState next = advance(state, blend, dt);
    next.attitude = normalized(next.attitude);
    check_attitude(next.attitude);
    return next;
}

// ---------------------------------------------------------------------------

void VelocityPlantConfig::validate() const {
    require_positive(time_constant.x(), "plant.tau_x");
    require_positive(time_constant.y(), "plant.tau_y");
    require_positive(time_constant.z(), "plant.tau_z");
    require_positive(max_speed, "plant.v_max");
    require_positive(yaw_time_constant, "plant.tau_yaw");
    require_positive(max_yaw_rate, "plant.yaw_rate_max");
}

RigidBodyState velocity_plant_step(const RigidBodyState& state, const Vec3& v_cmd_body,
                                   double yaw_rate_cmd, const VelocityPlantConfig& cfg,
                                   double dt) {
    if (!(dt > 0.0) || !std::isfinite(dt)) {
        throw InvalidArgument("dt must be > 0");
    }
    const RotationMatrix heading = rot_yaw(state.attitude.yaw);
    const Vec3 v_body = heading.transpose() * state.velocity;

    Vec3 v_next_body;
    Vec3 displacement_body;
    for (int axis = 0; axis < 3; ++axis) {
        const double tau = cfg.time_constant[axis];
        const double decay = std::exp(-dt / tau);
        const double target = v_cmd_body[axis];
        const double offset = v_body[axis] - target;
        v_next_body[axis] = target + offset * decay;
        displacement_body[axis] = target * dt + offset * tau * (1.0 - decay);
    }

    const double rate_cmd = std::clamp(yaw_rate_cmd, -cfg.max_yaw_rate, cfg.max_yaw_rate);
    const double yaw_decay = std::exp(-dt / cfg.yaw_time_constant);
    const double rate_offset = state.body_rates.z() - rate_cmd;
    const double yaw_rate = rate_cmd + rate_offset * yaw_decay;
    const double yaw_delta =
        rate_cmd * dt + rate_offset * cfg.yaw_time_constant * (1.0 - yaw_decay);

    RigidBodyState next;
    next.position = state.position + heading * displacement_body;
    next.velocity = heading * v_next_body;
    const double speed = next.velocity.norm();
    if (speed > cfg.max_speed) {
        next.velocity *= cfg.max_speed / speed;
    }
    next.attitude = {0.0, 0.0, wrap_angle(state.attitude.yaw + yaw_delta)};
    next.body_rates = {0.0, 0.0, yaw_rate};
    return next;
}

// ---------------------------------------------------------------------------

void CascadedGains::validate() const {
    require_positive(velocity_gain, "cascade.velocity_gain");
    require_positive(vertical_gain, "cascade.vertical_gain");
    require_positive(max_tilt, "cascade.max_tilt");
    require_positive(attitude_kp, "cascade.attitude_kp");
    require_positive(attitude_kd, "cascade.attitude_kd");
    require_positive(yaw_rate_gain, "cascade.yaw_rate_gain");
}

std::array<double, 4> mix_squared(double thrust, const Vec3& torque,
                                  const QuadParams& params) {
    // Inverse of the force/torque map:
    //   S = sum w_i^2, A = w3^2 - w4^2, B = w1^2 - w2^2, C = w1^2 + w2^2 - w3^2 - w4^2
    const double total = thrust / params.thrust_coeff;
    const double roll_diff = torque.x() / (params.thrust_coeff * params.arm_length);
    const double pitch_diff = torque.y() / (params.thrust_coeff * params.arm_length);
    const double yaw_split = -torque.z() / params.moment_coeff;
    const double front_pair = 0.5 * (total + yaw_split);  // w1^2 + w2^2
    const double side_pair = 0.5 * (total - yaw_split);   // w3^2 + w4^2
    return {0.5 * (front_pair + pitch_diff), 0.5 * (front_pair - pitch_diff),
            0.5 * (side_pair + roll_diff), 0.5 * (side_pair - roll_diff)};
}

MixResult mix(double thrust, const Vec3& torque, const QuadParams& params) {
    const auto squared = mix_squared(thrust, torque, params);
    const double ceiling = params.max_motor_speed * params.max_motor_speed;
    MixResult out;
    for (std::size_t i = 0; i < squared.size(); ++i) {
        const double clamped = std::clamp(squared[i], 0.0, ceiling);
        if (clamped != squared[i]) {
            out.saturated = true;
        }
        out.command.speed[i] = std::sqrt(clamped);
    }
    return out;
}

CascadedStepResult cascaded_plant_step(const RigidBodyState& state, const Vec3& v_cmd_body,
                                       double yaw_rate_cmd, const CascadedGains& gains,
                                       const QuadParams& params, double dt) {
    const RotationMatrix heading = rot_yaw(state.attitude.yaw);
    const Vec3 v_heading = heading.transpose() * state.velocity;
    const Vec3 error = v_cmd_body - v_heading;

    // Desired specific force in the heading frame (z down).
    const Vec3 accel{gains.velocity_gain * error.x(), gains.velocity_gain * error.y(),
                     gains.vertical_gain * error.z()};
    const Vec3 specific = accel - Vec3{0.0, 0.0, params.gravity};
    const double specific_norm = specific.norm();

    const double pitch_des =
        std::clamp(std::atan2(-specific.x(), -specific.z()), -gains.max_tilt, gains.max_tilt);
    const double roll_des =
        std::clamp(std::asin(std::clamp(specific.y() / specific_norm, -1.0, 1.0)),
                   -gains.max_tilt, gains.max_tilt);

    const double tilt_cos =
        std::max(0.5, std::cos(state.attitude.roll) * std::cos(state.attitude.pitch));
    const double thrust = std::max(0.0, params.mass * (params.gravity - accel.z()) / tilt_cos);

    const Vec3 torque{
        params.ixx * (gains.attitude_kp * (roll_des - state.attitude.roll) -
                      gains.attitude_kd * state.body_rates.x()),
        params.iyy * (gains.attitude_kp * (pitch_des - state.attitude.pitch) -
                      gains.attitude_kd * state.body_rates.y()),
        params.izz * gains.yaw_rate_gain * (yaw_rate_cmd - state.body_rates.z())};

    const MixResult mixed = mix(thrust, torque, params);
    CascadedStepResult out;
    out.motors = mixed.command;
    out.saturated = mixed.saturated;
    out.state = step(state, mixed.command, params, dt, GravityFrame::kEarth);
    return out;
}

}  // namespace pfsim
