#include "pfsim/pfc.hpp"

#include <cmath>

#include "pfsim/errors.hpp"

namespace pfsim {

namespace {

void require_positive(double value, const char* field) {
    if (!(value > 0.0) || !std::isfinite(value)) {
        throw ValidationError(field, "must be finite and > 0");
    }
}

}  // namespace

void PfcGains::validate() const {
    require_positive(lambda1, "gains.lambda1");
    require_positive(eta1, "gains.eta1");
    require_positive(p_star, "gains.p_star");
    require_positive(lambda2, "gains.lambda2");
    require_positive(eta2, "gains.eta2");
    require_positive(eta3, "gains.eta3");
    require_positive(eps_p, "gains.eps_p");
    require_positive(eps_v, "gains.eps_v");
    require_positive(v_cmd_max, "gains.v_cmd_max");
}

Vec3 attractive_velocity(const Vec3& p_d, const Vec3& p_t, double lambda1) {
    return -lambda1 * (p_d - p_t);
}

Vec3 repulsive_velocity(const Vec3& p_d, const Vec3& p_o, double eta1, double p_star,
                        double eps_p) {
    const Vec3 p_do = p_d - p_o;
    const double dist = p_do.norm();
    if (dist > p_star) {
        return Vec3::Zero();
    }
    const double r = std::max(dist, eps_p);
    const double r2 = r * r;
    return eta1 * p_do / (r2 * r2);
}

Vec3 saturate(const Vec3& v, double limit, bool* clipped) {
    const double n = v.norm();
    const bool over = n > limit;
    if (clipped != nullptr) {
        *clipped = over;
    }
    return over ? Vec3(v * (limit / n)) : v;
}

Vec3 pfc_raw_command(const Vec3& p_d, const Vec3& p_t, std::span<const Obstacle> obstacles,
                     const PfcGains& gains) {
    Vec3 repulsion = Vec3::Zero();
    for (const Obstacle& o : obstacles) {
        repulsion += repulsive_velocity(p_d, o.position, gains.eta1, gains.p_star, gains.eps_p);
    }
    return attractive_velocity(p_d, p_t, gains.lambda1) + repulsion;
}

Vec3 pfc_command(const Vec3& p_d, const Vec3& p_t, std::span<const Obstacle> obstacles,
                 const PfcGains& gains) {
    return saturate(pfc_raw_command(p_d, p_t, obstacles, gains), gains.v_cmd_max);
}

}  // namespace pfsim
