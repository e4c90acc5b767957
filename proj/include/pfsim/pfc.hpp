// Traditional potential field controller.
//
// Velocity commands are negative gradients of a quadratic attractive bowl
// around the target and inverse-square repulsive barriers around obstacles.
// Relative vectors are always drone-minus-other: p_dt = p_d - p_t and
// p_do = p_d - p_o, so repulsion along +p_do pushes the drone away.
#pragma once

#include <span>
#include <vector>

#include "pfsim/frames.hpp"

namespace pfsim {

struct PfcGains {
    double lambda1 = 0.9;      // position attraction [1/s]
    double eta1 = 0.5;         // position repulsion [m^3/s]
    double p_star = 4.0;       // repulsion cutoff radius [m]
    double lambda2 = 1.5;      // velocity attraction [-]
    double eta2 = 0.1;         // velocity repulsion
    double eta3 = 0.1;         // closing-rate repulsion [-]
    double eps_p = 1e-3;       // distance clamp [m]
    double eps_v = 1e-3;       // speed clamp [m/s]
    double v_cmd_max = 1.0;    // command saturation [m/s]
    // Drop position repulsion while the drone recedes from an obstacle (ePFC only).
    bool gate_position_repulsion_on_recede = true;

    void validate() const;
    bool operator==(const PfcGains&) const = default;
};

struct Obstacle {
    Vec3 position = Vec3::Zero();
    Vec3 velocity = Vec3::Zero();
    double radius = 0.25;  // collision radius, used by metrics only

    bool operator==(const Obstacle&) const = default;
};

/// lambda1 * (p_t - p_d).
Vec3 attractive_velocity(const Vec3& p_d, const Vec3& p_t, double lambda1);

/// eta1 * p_do / |p_do|^4 inside the cutoff, zero outside. |p_do| is clamped
/// below by eps_p; coincident points return zero.
Vec3 repulsive_velocity(const Vec3& p_d, const Vec3& p_o, double eta1, double p_star,
                        double eps_p = 1e-3);

/// Scales v down to norm `limit` if it is longer. Reports whether it did.
Vec3 saturate(const Vec3& v, double limit, bool* clipped = nullptr);

/// Attraction plus every in-range repulsion, before saturation.
Vec3 pfc_raw_command(const Vec3& p_d, const Vec3& p_t, std::span<const Obstacle> obstacles,
                     const PfcGains& gains);

/// pfc_raw_command saturated to gains.v_cmd_max.
Vec3 pfc_command(const Vec3& p_d, const Vec3& p_t, std::span<const Obstacle> obstacles,
                 const PfcGains& gains);

}  // namespace pfsim
