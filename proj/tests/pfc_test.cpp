#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "pfsim/errors.hpp"
#include "pfsim/pfc.hpp"
#include "test_util.hpp"

namespace pfsim {
namespace {

double attractive_potential(const Vec3& p_d, const Vec3& p_t, double lambda1) {
    return 0.5 * lambda1 * (p_d - p_t).squaredNorm();
}

double repulsive_potential(const Vec3& p_d, const Vec3& p_o, double eta1) {
    return 0.5 * eta1 / (p_d - p_o).squaredNorm();
}

TEST(Attraction, ZeroAtTarget) {
    const Vec3 p{1.0, 2.0, -1.0};
    EXPECT_EQ(attractive_velocity(p, p, 0.7), Vec3::Zero());
}

TEST(Attraction, PointsTowardTarget) {
    EXPECT_EQ(attractive_velocity({1.0, 0.0, 0.0}, Vec3::Zero(), 1.0), Vec3(-1.0, 0.0, 0.0));
}

TEST(Attraction, IsNegativeGradientOfBowl) {
    testing::Sampler s(31);
    for (int i = 0; i < 200; ++i) {
        const Vec3 p_d = s.vec(-5.0, 5.0);
        const Vec3 p_t = s.vec(-5.0, 5.0);
        const double lambda1 = s.uniform(0.1, 3.0);
        const Vec3 numeric = -testing::central_gradient(
            [&](const Vec3& x) { return attractive_potential(x, p_t, lambda1); }, p_d, 1e-5);
        EXPECT_LT(testing::relative_error(attractive_velocity(p_d, p_t, lambda1), numeric), 1e-6);
    }
}

TEST(Repulsion, ZeroJustOutsideCutoff) {
    EXPECT_EQ(repulsive_velocity({2.01, 0.0, 0.0}, Vec3::Zero(), 1.0, 2.0), Vec3::Zero());
    EXPECT_NE(repulsive_velocity({2.0, 0.0, 0.0}, Vec3::Zero(), 1.0, 2.0), Vec3::Zero());
}

TEST(Repulsion, UnitDistanceExample) {
    EXPECT_EQ(repulsive_velocity({1.0, 0.0, 0.0}, Vec3::Zero(), 1.0, 2.0), Vec3(1.0, 0.0, 0.0));
}

TEST(Repulsion, InverseCubeMagnitude) {
    const Vec3 v = repulsive_velocity({0.0, 0.5, 0.0}, Vec3::Zero(), 0.5, 4.0);
    EXPECT_DOUBLE_EQ(v.y(), 0.5 / (0.5 * 0.5 * 0.5));
}

TEST(Repulsion, AlwaysPointsAwayFromObstacle) {
    testing::Sampler s(32);
    for (int i = 0; i < 1000; ++i) {
        const Vec3 p_d = s.vec(-3.0, 3.0);
        const Vec3 p_o = s.vec(-3.0, 3.0);
        const Vec3 v = repulsive_velocity(p_d, p_o, 0.5, 4.0);
        EXPECT_GE(v.dot(p_d - p_o), 0.0);
    }
}

TEST(Repulsion, IsNegativeGradientInsideCutoff) {
    testing::Sampler s(33);
    int checked = 0;
    while (checked < 200) {
        const Vec3 p_d = s.vec(-2.0, 2.0);
        const Vec3 p_o = s.vec(-2.0, 2.0);
        const double dist = (p_d - p_o).norm();
        if (dist < 0.2 || dist > 3.9) {
            continue;
        }
        const double eta1 = s.uniform(0.1, 2.0);
        const Vec3 numeric = -testing::central_gradient(
            [&](const Vec3& x) { return repulsive_potential(x, p_o, eta1); }, p_d, 1e-5);
        EXPECT_LT(testing::relative_error(repulsive_velocity(p_d, p_o, eta1, 4.0), numeric), 1e-6);
        ++checked;
    }
}

TEST(Repulsion, CoincidentPointsAreFinite) {
    const Vec3 v = repulsive_velocity(Vec3::Ones(), Vec3::Ones(), 0.5, 4.0);
    EXPECT_TRUE(is_finite(v));
    EXPECT_EQ(v, Vec3::Zero());
    const Vec3 near = repulsive_velocity({1e-9, 0.0, 0.0}, Vec3::Zero(), 0.5, 4.0);
    EXPECT_TRUE(is_finite(near));
    EXPECT_DOUBLE_EQ(near.x(), 0.5 * 1e-9 / 1e-12);
}

TEST(Saturation, ClipsOnlyLongVectors) {
    bool clipped = true;
    EXPECT_EQ(saturate({0.3, 0.4, 0.0}, 1.0, &clipped), Vec3(0.3, 0.4, 0.0));
    EXPECT_FALSE(clipped);
    const Vec3 v = saturate({3.0, 4.0, 0.0}, 1.0, &clipped);
    EXPECT_TRUE(clipped);
    EXPECT_NEAR(v.norm(), 1.0, 1e-15);
    EXPECT_NEAR(v.x(), 0.6, 1e-15);
}

TEST(PfcCommand, NoObstaclesEqualsAttraction) {
    PfcGains g;
    g.v_cmd_max = 100.0;
    const Vec3 p_d{1.0, -2.0, -1.0};
    const Vec3 p_t{0.5, 0.5, -1.0};
    EXPECT_EQ(pfc_command(p_d, p_t, {}, g), attractive_velocity(p_d, p_t, g.lambda1));
}

TEST(PfcCommand, ObstacleOnLineSlowsApproach) {
    PfcGains g;
    g.v_cmd_max = 100.0;
    const Vec3 p_d{0.0, 0.0, -1.0};
    const Vec3 p_t{4.0, 0.0, -1.0};
    const std::vector<Obstacle> obstacles{{{2.0, 0.0, -1.0}, Vec3::Zero(), 0.25}};
    const Vec3 along = (p_t - p_d).normalized();
    const double with = pfc_command(p_d, p_t, obstacles, g).dot(along);
    const double without = pfc_command(p_d, p_t, {}, g).dot(along);
    EXPECT_LT(with, without);
}

TEST(PfcCommand, MirroredObstaclesCancelLaterally) {
    PfcGains g;
    g.v_cmd_max = 100.0;
    const Vec3 p_d{0.0, 0.0, -1.0};
    const Vec3 p_t{4.0, 0.0, -1.0};
    const std::vector<Obstacle> obstacles{{{1.5, 0.7, -1.0}, Vec3::Zero(), 0.25},
                                          {{1.5, -0.7, -1.0}, Vec3::Zero(), 0.25}};
    const Vec3 v = pfc_command(p_d, p_t, obstacles, g);
    EXPECT_NEAR(v.y(), 0.0, 1e-12);
    EXPECT_NEAR(v.z(), 0.0, 1e-12);
}

TEST(PfcCommand, SaturatedToCommandLimit) {
    const PfcGains g;
    const Vec3 v = pfc_command(Vec3::Zero(), {10.0, 0.0, 0.0}, {}, g);
    EXPECT_NEAR(v.norm(), g.v_cmd_max, 1e-15);
}

TEST(PfcCommand, ScalesLinearlyWithAttractionGain) {
    testing::Sampler s(34);
    for (int i = 0; i < 100; ++i) {
        PfcGains g;
        g.v_cmd_max = 1e9;
        const Vec3 p_d = s.vec(-3.0, 3.0);
        const Vec3 p_t = s.vec(-3.0, 3.0);
        const Vec3 base = pfc_command(p_d, p_t, {}, g);
        g.lambda1 *= 4.0;
        EXPECT_EQ(pfc_command(p_d, p_t, {}, g), 4.0 * base);
    }
}

TEST(PfcCommand, FiniteForAnyInput) {
    testing::Sampler s(35);
    const PfcGains g;
    for (int i = 0; i < 10000; ++i) {
        const Vec3 p_d = s.vec(-5.0, 5.0);
        const Vec3 p_o = (i % 10 == 0) ? p_d : s.vec(-5.0, 5.0);
        const std::vector<Obstacle> obstacles{{p_o, Vec3::Zero(), 0.25}};
        ASSERT_TRUE(is_finite(pfc_command(p_d, s.vec(-5.0, 5.0), obstacles, g)));
    }
}

TEST(PfcCommand, KinematicConvergenceIsExponential) {
    PfcGains g;
    const Vec3 p_t{1.0, 2.0, -1.0};
    Vec3 p = p_t + Vec3{0.6, -0.8, 0.0};  // unit error keeps the command unsaturated
    const double e0 = (p - p_t).norm();
    const double dt = 1e-3;
    for (int k = 1; k <= 5000; ++k) {
        p += dt * pfc_command(p, p_t, {}, g);
        if (k % 500 == 0) {
            const double expected = e0 * std::exp(-g.lambda1 * k * dt);
            ASSERT_NEAR((p - p_t).norm() / expected, 1.0, 0.01) << "t=" << k * dt;
        }
    }
}

TEST(Gains, ValidateRejectsNonPositive) {
    PfcGains g;
    EXPECT_NO_THROW(g.validate());
    g.p_star = 0.0;
    try {
        g.validate();
        FAIL();
    } catch (const ValidationError& e) {
        EXPECT_EQ(e.field(), "gains.p_star");
    }
    g = PfcGains{};
    g.eta3 = std::numeric_limits<double>::quiet_NaN();
    EXPECT_THROW(g.validate(), ValidationError);
}

}  // namespace
}  // namespace pfsim
