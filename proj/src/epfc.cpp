#include "pfsim/epfc.hpp"

#include <cmath>

namespace pfsim {

Vec3 velocity_attractive(const Vec3& v_d, const Vec3& v_t, double lambda2) {
    return -lambda2 * (v_d - v_t);
}

Vec3 velocity_repulsive(const Vec3& v_d, const Vec3& v_o, double eta2, double eps_v) {
    if (v_o.norm() < eps_v) {
        return Vec3::Zero();
    }
    const Vec3 v_do = v_d - v_o;
    const double speed = v_do.norm();
    if (speed < eps_v) {
        return Vec3::Zero();
    }
    const double s2 = speed * speed;
    return eta2 * v_do / (s2 * s2);
}

double closing_rate(const Vec3& p_d, const Vec3& p_o, const Vec3& v_d, const Vec3& v_o,
                    double eps_p) {
    const Vec3 p_do = p_d - p_o;
    const double dist = p_do.norm();
    if (dist == 0.0) {
        return 0.0;
    }
    return p_do.dot(v_d - v_o) / std::max(dist, eps_p);
}

Vec3 closing_repulsive(const Vec3& p_d, const Vec3& p_o, const Vec3& v_d, const Vec3& v_o,
                       double eta3, double eps_p) {
    const double rdot = closing_rate(p_d, p_o, v_d, v_o, eps_p);
    if (!(rdot < 0.0)) {
        return Vec3::Zero();
    }
    const Vec3 p_do = p_d - p_o;
    return -eta3 * rdot * p_do / std::max(p_do.norm(), eps_p);
}

ControlTerms pfc_terms(const Vec3& p_d, const Vec3& p_t, std::span<const Obstacle> obstacles,
                       const PfcGains& gains) {
    ControlTerms terms;
    terms.attract_position = attractive_velocity(p_d, p_t, gains.lambda1);
    for (const Obstacle& o : obstacles) {
        if ((p_d - o.position).norm() <= gains.p_star) {
            terms.gates |= kGatePositionRepulsion;
        }
        terms.repulse_position +=
            repulsive_velocity(p_d, o.position, gains.eta1, gains.p_star, gains.eps_p);
    }
    terms.raw = terms.attract_position + terms.repulse_position;
    terms.command = saturate(terms.raw, gains.v_cmd_max, &terms.saturated);
    return terms;
}

ControlTerms epfc_terms(const KinematicState& drone, const KinematicState& target,
                        std::span<const Obstacle> obstacles, const PfcGains& gains) {
    const Vec3& p_d = drone.position;
    const Vec3& v_d = drone.velocity;

    ControlTerms terms;
    terms.attract_position = attractive_velocity(p_d, target.position, gains.lambda1);
    terms.attract_velocity = velocity_attractive(v_d, target.velocity, gains.lambda2);

    for (const Obstacle& o : obstacles) {
        const bool in_range = (p_d - o.position).norm() <= gains.p_star;
        const double rdot = closing_rate(p_d, o.position, v_d, o.velocity, gains.eps_p);
        const bool closing = rdot < 0.0;

        if (in_range && (closing || !gains.gate_position_repulsion_on_recede)) {
            terms.gates |= kGatePositionRepulsion;
            terms.repulse_position +=
                repulsive_velocity(p_d, o.position, gains.eta1, gains.p_star, gains.eps_p);
        }
        const Vec3 vel_rep = velocity_repulsive(v_d, o.velocity, gains.eta2, gains.eps_v);
        if (o.velocity.norm() >= gains.eps_v) {
            terms.gates |= kGateVelocityRepulsion;
        }
        terms.repulse_velocity += vel_rep;
        if (in_range && closing) {
            terms.gates |= kGateClosingRepulsion;
            terms.closing +=
                closing_repulsive(p_d, o.position, v_d, o.velocity, gains.eta3, gains.eps_p);
        }
    }

    const Vec3 traditional = terms.attract_position + terms.repulse_position;
    const Vec3 extension = terms.attract_velocity + terms.repulse_velocity + terms.closing;
    terms.raw = traditional + extension;
    terms.command = saturate(terms.raw, gains.v_cmd_max, &terms.saturated);
    return terms;
}

Vec3 epfc_command(const KinematicState& drone, const KinematicState& target,
                  std::span<const Obstacle> obstacles, const PfcGains& gains) {
    return epfc_terms(drone, target, obstacles, gains).command;
}

Vec3 to_body_frame(const Vec3& v_cmd_earth, double yaw) {
    return rot_yaw(yaw).transpose() * v_cmd_earth;
}

HeadingCommand yaw_to_face_target(const Vec3& p_d, const Vec3& p_t, double previous_yaw,
                                  double eps_p) {
    const double dx = p_t.x() - p_d.x();
    const double dy = p_t.y() - p_d.y();
    if (std::hypot(dx, dy) <= eps_p) {
        return {previous_yaw, true};
    }
    return {wrap_angle(std::atan2(dy, dx)), false};
}

}  // namespace pfsim
