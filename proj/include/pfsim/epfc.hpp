// Extended potential field controller.
//
// Adds three velocity-space terms to the traditional controller: attraction
// toward the target's velocity, repulsion from a moving obstacle's velocity,
// and a closing-rate push that acts only while the drone approaches an
// obstacle. Commands are computed in the earth frame.
#pragma once

#include <cstdint>
#include <span>

#include "pfsim/pfc.hpp"

namespace pfsim {

struct KinematicState {
    Vec3 position = Vec3::Zero();
    Vec3 velocity = Vec3::Zero();
};

/// Bits of ControlTerms::gates; a set bit means the term was active for at
/// least one obstacle.
enum GateBit : std::uint32_t {
    kGatePositionRepulsion = 1u << 0,
    kGateVelocityRepulsion = 1u << 1,
    kGateClosingRepulsion = 1u << 2,
};

/// Per-term breakdown of one controller evaluation (earth frame, m/s).
struct ControlTerms {
    Vec3 attract_position = Vec3::Zero();
    Vec3 repulse_position = Vec3::Zero();
    Vec3 attract_velocity = Vec3::Zero();
    Vec3 repulse_velocity = Vec3::Zero();
    Vec3 closing = Vec3::Zero();
    Vec3 raw = Vec3::Zero();      // sum before saturation
    Vec3 command = Vec3::Zero();  // raw saturated to v_cmd_max
    std::uint32_t gates = 0;
    bool saturated = false;

    bool any_repulsion() const { return gates != 0; }
};

/// -lambda2 * (v_d - v_t).
Vec3 velocity_attractive(const Vec3& v_d, const Vec3& v_t, double lambda2);

/// eta2 * v_do / |v_do|^4 for a moving obstacle. Zero when |v_o| < eps_v
/// (stationary) or |v_do| < eps_v (matched velocities).
Vec3 velocity_repulsive(const Vec3& v_d, const Vec3& v_o, double eta2, double eps_v = 1e-3);

/// d|p_do|/dt = (p_do . v_do) / |p_do|; negative while closing. Zero for
/// coincident points.
double closing_rate(const Vec3& p_d, const Vec3& p_o, const Vec3& v_d, const Vec3& v_o,
                    double eps_p = 1e-3);

/// -eta3 * rdot * p_do / |p_do| while rdot < 0, zero otherwise.
Vec3 closing_repulsive(const Vec3& p_d, const Vec3& p_o, const Vec3& v_d, const Vec3& v_o,
                       double eta3, double eps_p = 1e-3);

/// Traditional controller with its term breakdown.
ControlTerms pfc_terms(const Vec3& p_d, const Vec3& p_t, std::span<const Obstacle> obstacles,
                       const PfcGains& gains);

/// Full extended controller. `raw` is assembled as
/// (attract_position + repulse_position) + (attract_velocity + repulse_velocity + closing).
ControlTerms epfc_terms(const KinematicState& drone, const KinematicState& target,
                        std::span<const Obstacle> obstacles, const PfcGains& gains);

Vec3 epfc_command(const KinematicState& drone, const KinematicState& target,
                  std::span<const Obstacle> obstacles, const PfcGains& gains);

/// Yaw-only earth -> body rotation of a command; z passes through.
Vec3 to_body_frame(const Vec3& v_cmd_earth, double yaw);

struct HeadingCommand {
    double yaw = 0.0;
    bool held = false;  // target directly overhead/below; previous heading kept
};

/// Heading that points the nose at the target, wrapped to (-pi, pi].
HeadingCommand yaw_to_face_target(const Vec3& p_d, const Vec3& p_t, double previous_yaw,
                                  double eps_p = 1e-3);

}  // namespace pfsim
