// Missions and the closed-loop simulation that flies them.
#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "pfsim/dynamics.hpp"
#include "pfsim/epfc.hpp"

namespace pfsim {

enum class ControllerKind { kPfc, kEpfc };
enum class PlantKind { kKinematic, kLag, kFull };

std::string_view to_string(ControllerKind kind);
std::string_view to_string(PlantKind kind);
/// Throws ValidationError on unknown names.
ControllerKind parse_controller(std::string_view name);
PlantKind parse_plant(std::string_view name);

struct Waypoint {
    Vec3 position = Vec3::Zero();
    double dwell = 2.0;  // [s]

    bool operator==(const Waypoint&) const = default;
};

struct StaticPoint {
    Vec3 position = Vec3::Zero();

    bool operator==(const StaticPoint&) const = default;
};

/// Waypoints visited in order. A waypoint is reached once the drone stays
/// inside `acquisition_radius` for its dwell time; leaving the radius restarts
/// the dwell clock. A leg that takes longer than `leg_timeout` advances anyway.
struct WaypointSequence {
    std::vector<Waypoint> waypoints;
    double acquisition_radius = 0.15;
    double leg_timeout = 30.0;

    bool operator==(const WaypointSequence&) const = default;
};

/// Polyline traversed at constant speed, looping when closed.
struct ParametricPath {
    std::vector<Vec3> vertices;
    double speed = 0.3;  // [m/s]
    bool closed = true;

    bool operator==(const ParametricPath&) const = default;
};

using TargetSpec = std::variant<StaticPoint, WaypointSequence, ParametricPath>;

/// Tracks which waypoint is active. Index never decreases.
class WaypointProgress {
public:
    explicit WaypointProgress(const WaypointSequence& seq);

    std::size_t index() const { return index_; }
    bool complete() const { return index_ >= seq_.waypoints.size(); }
    bool last_advance_timed_out() const { return timed_out_; }

    /// Feeds the drone position at time t; returns true if the active
    /// waypoint advanced.
    bool update(double t, const Vec3& drone_position);

private:
    WaypointSequence seq_;
    std::size_t index_ = 0;
    double leg_start_ = 0.0;
    std::optional<double> arrival_;
    bool timed_out_ = false;
};

/// Target position and exact velocity at time t. Waypoint targets need the
/// progress tracker and are stationary between advances.
KinematicState target_state(const TargetSpec& spec, double t,
                            const WaypointProgress* progress = nullptr);

struct Scenario {
    std::string name = "custom";
    TargetSpec target = StaticPoint{};
    std::vector<Obstacle> obstacles;
    PfcGains gains;
    ControllerKind controller = ControllerKind::kEpfc;
    PlantKind plant = PlantKind::kLag;
    QuadParams params;
    VelocityPlantConfig lag;
    CascadedGains cascade;
    double dt = 0.005;     // [s]
    double t_end = 120.0;  // [s]
    double standoff = 0.0; // [m]
    std::uint64_t seed = 0;
    Vec3 initial_position{0.0, 0.0, -1.0};
    double initial_yaw = 0.0;
    bool face_target = false;
    double yaw_gain = 1.5;  // heading error -> yaw-rate command [1/s]
    bool stop_when_complete = true;

    /// Throws ValidationError naming the offending field.
    void validate() const;
    bool operator==(const Scenario&) const = default;
};

/// Obstacle position at time t (obstacles move with constant velocity).
Obstacle obstacle_at(const Obstacle& o, double t);

struct TrajectoryRecord {
    double t = 0.0;
    RigidBodyState drone;
    KinematicState target;
    Vec3 goal = Vec3::Zero();  // point actually attracted to (target plus standoff)
    ControlTerms terms;
    Vec3 command_body = Vec3::Zero();
    double yaw_rate_command = 0.0;
    std::size_t waypoint_index = 0;
    bool motor_saturated = false;

    bool saturated() const { return terms.saturated || motor_saturated; }
};

struct AdvanceEvent {
    std::size_t record_index = 0;  // first record aimed at the next waypoint
    double t = 0.0;
    std::size_t waypoint = 0;      // waypoint that was completed
    bool timed_out = false;
};

struct TrajectoryLog {
    double dt = 0.0;
    std::vector<TrajectoryRecord> records;
    std::vector<AdvanceEvent> advances;
    bool mission_complete = false;
};

/// Fixed-step closed loop: target -> controller -> body-frame command ->
/// plant. Throws NumericAbort if the state goes non-finite.
TrajectoryLog run(const Scenario& scenario);

/// Names accepted by builtin_scenario.
std::vector<std::string> builtin_names();

/// Throws ValidationError listing the available names for an unknown one.
/// `seed` only affects randomized layouts (multi-obstacle).
Scenario builtin_scenario(std::string_view name, std::optional<std::uint64_t> seed = {});

std::vector<Scenario> builtin_scenarios();

/// Horizontal disk that randomly placed obstacles must stay out of.
struct KeepOut {
    Vec3 center = Vec3::Zero();
    double radius = 0.0;
};

/// Obstacle field used by `multi-obstacle`: up to `count` obstacles drawn
/// from a seeded generator, outside every keep-out disk and at least 1 m
/// apart.
std::vector<Obstacle> random_obstacles(std::uint64_t seed, std::size_t count,
                                       const std::vector<KeepOut>& keep_out);

}  // namespace pfsim
