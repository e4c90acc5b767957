#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "pfsim/dynamics.hpp"
#include "pfsim/epfc.hpp"
#include "test_util.hpp"

namespace pfsim {
namespace {

using std::numbers::pi;

double velocity_attraction_potential(const Vec3& v_d, const Vec3& v_t, double lambda2) {
    return 0.5 * lambda2 * (v_d - v_t).squaredNorm();
}

double velocity_repulsion_potential(const Vec3& v_d, const Vec3& v_o, double eta2) {
    return 0.5 * eta2 / (v_d - v_o).squaredNorm();
}

TEST(VelocityAttraction, ZeroWhenMatched) {
    const Vec3 v{0.3, -0.2, 0.1};
    EXPECT_EQ(velocity_attractive(v, v, 0.9), Vec3::Zero());
}

TEST(VelocityAttraction, HandExample) {
    EXPECT_EQ(velocity_attractive({1.0, 0.0, 0.0}, Vec3::Zero(), 2.0), Vec3(-2.0, 0.0, 0.0));
}

TEST(VelocityAttraction, IsNegativeGradient) {
    testing::Sampler s(41);
    for (int i = 0; i < 200; ++i) {
        const Vec3 v_d = s.vec(-2.0, 2.0);
        const Vec3 v_t = s.vec(-2.0, 2.0);
        const double lambda2 = s.uniform(0.1, 3.0);
        const Vec3 numeric = -testing::central_gradient(
            [&](const Vec3& x) { return velocity_attraction_potential(x, v_t, lambda2); }, v_d,
            1e-5);
        EXPECT_LT(testing::relative_error(velocity_attractive(v_d, v_t, lambda2), numeric), 1e-6);
    }
}

TEST(VelocityRepulsion, StationaryObstacleHasNoEffect) {
    EXPECT_EQ(velocity_repulsive({1.0, 0.0, 0.0}, Vec3::Zero(), 1.0), Vec3::Zero());
    EXPECT_EQ(velocity_repulsive({1.0, 0.0, 0.0}, {5e-4, 0.0, 0.0}, 1.0), Vec3::Zero());
}

TEST(VelocityRepulsion, HandExample) {
    EXPECT_EQ(velocity_repulsive({2.0, 0.0, 0.0}, {1.0, 0.0, 0.0}, 1.0), Vec3(1.0, 0.0, 0.0));
}

TEST(VelocityRepulsion, MatchedVelocityGivesZero) {
    const Vec3 v{0.5, 0.5, 0.0};
    EXPECT_EQ(velocity_repulsive(v, v, 1.0), Vec3::Zero());
}

TEST(VelocityRepulsion, IsNegativeGradient) {
    testing::Sampler s(42);
    int checked = 0;
    while (checked < 200) {
        const Vec3 v_d = s.vec(-2.0, 2.0);
        const Vec3 v_o = s.vec(-2.0, 2.0);
        if ((v_d - v_o).norm() < 0.2 || v_o.norm() < 0.01) {
            continue;
        }
        const double eta2 = s.uniform(0.05, 1.0);
        const Vec3 numeric = -testing::central_gradient(
            [&](const Vec3& x) { return velocity_repulsion_potential(x, v_o, eta2); }, v_d, 1e-5);
        EXPECT_LT(testing::relative_error(velocity_repulsive(v_d, v_o, eta2), numeric), 1e-6);
        ++checked;
    }
}

TEST(ClosingRate, Examples) {
    const Vec3 v{0.3, 0.1, 0.0};
    EXPECT_EQ(closing_rate({1.0, 0.0, 0.0}, Vec3::Zero(), v, v), 0.0);
    EXPECT_DOUBLE_EQ(closing_rate({1.0, 0.0, 0.0}, Vec3::Zero(), {-2.0, 0.0, 0.0}, Vec3::Zero()),
                     -2.0);
    EXPECT_EQ(closing_rate({1.0, 0.0, 0.0}, Vec3::Zero(), {0.0, 1.0, 0.0}, Vec3::Zero()), 0.0);
    EXPECT_EQ(closing_rate(Vec3::Ones(), Vec3::Ones(), v, Vec3::Zero()), 0.0);
}

TEST(ClosingRate, MatchesDistanceDerivative) {
    testing::Sampler s(43);
    for (int i = 0; i < 200; ++i) {
        const Vec3 p_d = s.vec(-3.0, 3.0), p_o = s.vec(-3.0, 3.0);
        const Vec3 v_d = s.vec(-1.0, 1.0), v_o = s.vec(-1.0, 1.0);
        const double h = 1e-6;
        const double numeric = ((p_d + h * v_d - p_o - h * v_o).norm() -
                                (p_d - h * v_d - p_o + h * v_o).norm()) /
                               (2 * h);
        EXPECT_NEAR(closing_rate(p_d, p_o, v_d, v_o), numeric, 1e-7);
    }
}

TEST(ClosingRepulsion, ZeroWhileReceding) {
    EXPECT_EQ(closing_repulsive({1.0, 0.0, 0.0}, Vec3::Zero(), {1.0, 0.0, 0.0}, Vec3::Zero(), 1.0),
              Vec3::Zero());
}

TEST(ClosingRepulsion, HandExample) {
    const Vec3 v =
        closing_repulsive({2.0, 0.0, 0.0}, Vec3::Zero(), {-1.0, 0.0, 0.0}, Vec3::Zero(), 1.0);
    EXPECT_EQ(v, Vec3(1.0, 0.0, 0.0));
}

TEST(ClosingRepulsion, NeverPointsTowardObstacle) {
    testing::Sampler s(44);
    for (int i = 0; i < 1000; ++i) {
        const Vec3 p_d = s.vec(-3.0, 3.0), p_o = s.vec(-3.0, 3.0);
        const Vec3 out = closing_repulsive(p_d, p_o, s.vec(-1, 1), s.vec(-1, 1), 0.5);
        EXPECT_GE(out.dot(p_d - p_o), 0.0);
    }
}

TEST(EpfcCommand, EquilibriumAtStaticTarget) {
    const PfcGains g;
    const KinematicState s{{1.0, 1.0, -1.0}, Vec3::Zero()};
    EXPECT_EQ(epfc_command(s, s, {}, g), Vec3::Zero());
}

TEST(EpfcCommand, ObstacleFreeIsProportionalDerivative) {
    PfcGains g;
    g.v_cmd_max = 1e9;
    testing::Sampler s(45);
    for (int i = 0; i < 100; ++i) {
        const KinematicState d{s.vec(-3, 3), s.vec(-1, 1)};
        const KinematicState t{s.vec(-3, 3), Vec3::Zero()};
        const Vec3 expected = -g.lambda1 * (d.position - t.position) - g.lambda2 * d.velocity;
        EXPECT_LT((epfc_command(d, t, {}, g) - expected).norm(), 1e-12);
    }
}

TEST(EpfcCommand, RecedingFromAllObstaclesIgnoresThem) {
    PfcGains g;
    g.v_cmd_max = 1e9;
    const KinematicState d{{1.0, 0.5, -1.0}, {0.4, 0.2, 0.0}};
    const KinematicState t{{3.0, 0.0, -1.0}, Vec3::Zero()};
    const std::vector<Obstacle> obstacles{{{0.0, 0.0, -1.0}, Vec3::Zero(), 0.25},
                                          {{0.5, 1.0, -1.0}, Vec3::Zero(), 0.25}};
    const ControlTerms terms = epfc_terms(d, t, obstacles, g);
    EXPECT_EQ(terms.gates, 0u);
    EXPECT_EQ(terms.command, epfc_command(d, t, {}, g));
}

TEST(EpfcCommand, RecedeGateFlagRestoresPositionRepulsion) {
    PfcGains g;
    g.gate_position_repulsion_on_recede = false;
    const KinematicState d{{1.0, 0.0, -1.0}, {0.4, 0.0, 0.0}};
    const KinematicState t{{3.0, 0.0, -1.0}, Vec3::Zero()};
    const std::vector<Obstacle> obstacles{{{0.0, 0.0, -1.0}, Vec3::Zero(), 0.25}};
    const ControlTerms terms = epfc_terms(d, t, obstacles, g);
    EXPECT_EQ(terms.gates, static_cast<std::uint32_t>(kGatePositionRepulsion));
    EXPECT_GT(terms.repulse_position.x(), 0.0);
    EXPECT_EQ(terms.closing, Vec3::Zero());
}

TEST(EpfcCommand, DecomposesIntoTraditionalPlusExtension) {
    PfcGains g;
    g.gate_position_repulsion_on_recede = false;
    testing::Sampler s(46);
    for (int i = 0; i < 1000; ++i) {
        const KinematicState d{s.vec(-3, 3), s.vec(-1, 1)};
        const KinematicState t{s.vec(-3, 3), s.vec(-0.5, 0.5)};
        std::vector<Obstacle> obstacles;
        for (int k = 0; k < 3; ++k) {
            obstacles.push_back({s.vec(-3, 3), (k == 0) ? Vec3::Zero() : s.vec(-1, 1), 0.25});
        }
        const ControlTerms ext = epfc_terms(d, t, obstacles, g);
        const ControlTerms trad = pfc_terms(d.position, t.position, obstacles, g);
        ASSERT_EQ(trad.raw, pfc_raw_command(d.position, t.position, obstacles, g));
        const Vec3 extension = ext.attract_velocity + ext.repulse_velocity + ext.closing;
        ASSERT_EQ(ext.raw, trad.raw + extension);
        ASSERT_LT((ext.raw - trad.raw - extension).norm(),
                  1e-14 * std::max(1.0, ext.raw.norm()));
    }
}

TEST(EpfcCommand, TermsAreZeroExactlyWhenGated) {
    const PfcGains g;
    testing::Sampler s(47);
    for (int i = 0; i < 2000; ++i) {
        const KinematicState d{s.vec(-6, 6), s.vec(-1, 1)};
        const KinematicState t{s.vec(-6, 6), Vec3::Zero()};
        const Obstacle o{s.vec(-6, 6), (i % 2 == 0) ? Vec3::Zero() : s.vec(-1, 1), 0.25};
        const std::vector<Obstacle> one{o};
        const ControlTerms terms = epfc_terms(d, t, one, g);

        const double dist = (d.position - o.position).norm();
        const double rdot = closing_rate(d.position, o.position, d.velocity, o.velocity);
        const bool in_range = dist <= g.p_star;
        const bool closing = rdot < 0.0;
        const bool moving = o.velocity.norm() >= g.eps_v;

        EXPECT_EQ(terms.repulse_position.isZero(0.0), !(in_range && closing));
        EXPECT_EQ(terms.closing.isZero(0.0), !(in_range && closing));
        EXPECT_EQ(terms.repulse_velocity.isZero(0.0), !moving);
        EXPECT_EQ((terms.gates & kGateVelocityRepulsion) != 0, moving);
    }
}

TEST(EpfcCommand, FiniteForDegenerateInputs) {
    const PfcGains g;
    testing::Sampler s(48);
    for (int i = 0; i < 20000; ++i) {
        const Vec3 p = s.vec(-3, 3);
        const Vec3 v = s.vec(-1, 1);
        const KinematicState d{p, v};
        const KinematicState t{(i % 3 == 0) ? p : s.vec(-3, 3), (i % 5 == 0) ? v : s.vec(-1, 1)};
        const Obstacle o{(i % 2 == 0) ? p : s.vec(-3, 3), (i % 4 == 0) ? v : s.vec(-1, 1), 0.25};
        const std::vector<Obstacle> one{o};
        ASSERT_TRUE(is_finite(epfc_command(d, t, one, g)));
    }
}

TEST(EpfcCommand, LagPlantTrackingSettlesWithoutRinging) {
    const PfcGains g;
    const VelocityPlantConfig plant;
    const KinematicState target{{3.0, 0.0, -1.0}, Vec3::Zero()};
    RigidBodyState s;
    s.position = {0.0, 0.0, -1.0};
    const double e0 = s.position.x() - target.position.x();
    int sign_changes = 0;
    double previous = e0;
    for (int k = 0; k < 6000; ++k) {
        const Vec3 cmd = epfc_command({s.position, s.velocity}, target, {}, g);
        s = velocity_plant_step(s, to_body_frame(cmd, s.attitude.yaw), 0.0, plant, 0.005);
        const double e = s.position.x() - target.position.x();
        // Sub-millimetre ripple of an underdamped tail is not a crossing.
        if (std::abs(e) > 1e-3 * std::abs(e0) && e * previous < 0.0) {
            ++sign_changes;
        }
        if (std::abs(e) > 1e-3 * std::abs(e0)) {
            previous = e;
        }
    }
    EXPECT_LE(sign_changes, 1);
    EXPECT_LT(std::abs(s.position.x() - target.position.x()), 1e-3);
}

TEST(BodyFrame, YawRotation) {
    const Vec3 v{0.3, -0.4, 0.2};
    EXPECT_EQ(to_body_frame(v, 0.0), v);
    EXPECT_LT((to_body_frame({1.0, 0.0, 0.0}, pi / 2) - Vec3(0.0, -1.0, 0.0)).norm(), 1e-15);
    testing::Sampler s(49);
    for (int i = 0; i < 1000; ++i) {
        const Vec3 w = s.vec(-2, 2);
        const double yaw = s.uniform(-pi, pi);
        EXPECT_LT((body_to_earth(to_body_frame(w, yaw), {0.0, 0.0, yaw}) - w).norm(), 1e-12);
        EXPECT_EQ(to_body_frame(w, yaw).z(), w.z());
    }
}

TEST(Heading, FacesTarget) {
    EXPECT_EQ(yaw_to_face_target(Vec3::Zero(), {1.0, 0.0, 0.0}, 0.3).yaw, 0.0);
    EXPECT_DOUBLE_EQ(yaw_to_face_target(Vec3::Zero(), {0.0, 1.0, 0.0}, 0.3).yaw, pi / 2);
    EXPECT_DOUBLE_EQ(yaw_to_face_target(Vec3::Zero(), {-1.0, -1.0, 0.0}, 0.3).yaw, -3 * pi / 4);
    EXPECT_DOUBLE_EQ(yaw_to_face_target(Vec3::Zero(), {-1.0, 0.0, 0.0}, 0.3).yaw, pi);
}

TEST(Heading, HoldsPreviousWhenOverhead) {
    const HeadingCommand h = yaw_to_face_target({1.0, 1.0, -1.0}, {1.0, 1.0, -3.0}, 0.7);
    EXPECT_TRUE(h.held);
    EXPECT_EQ(h.yaw, 0.7);
}

}  // namespace
}  // namespace pfsim
