// Post-run evaluation: step-response quality per waypoint leg, obstacle
// clearance, collisions and controller comparisons.
#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "pfsim/diagnostics.hpp"
#include "pfsim/scenario.hpp"

namespace pfsim {

/// One waypoint transition: records [begin, end) aimed at `goal`, starting
/// from `start` (the previous goal, or the initial position for the first leg).
struct Leg {
    std::size_t index = 0;
    std::size_t begin = 0;
    std::size_t end = 0;
    Vec3 start = Vec3::Zero();
    Vec3 goal = Vec3::Zero();
};

/// Legs from the log's advance events. Non-waypoint missions form a single leg
/// ending at the final goal.
std::vector<Leg> legs(const TrajectoryLog& log);

/// Axis carrying the largest component of the step.
int dominant_axis(const Leg& leg);

/// Peak excursion past the goal along the dominant axis, in percent of the
/// step. Absent for a zero step.
std::optional<double> overshoot(const TrajectoryLog& log, const Leg& leg);

/// Time from leg start after which the dominant-axis error stays within
/// band * |step| until the leg ends. Absent for a zero step or if the
/// response never settles inside the leg.
std::optional<double> settling_time(const TrajectoryLog& log, const Leg& leg,
                                    double band = 0.05);

/// Minimum over time and obstacles of |p_d - p_o| - radius; +infinity without
/// obstacles.
double min_clearance(const TrajectoryLog& log, const std::vector<Obstacle>& obstacles);

/// Number of contiguous runs of records with non-positive clearance.
std::size_t collisions(const TrajectoryLog& log, const std::vector<Obstacle>& obstacles);

struct LegMetrics {
    std::size_t index = 0;
    Vec3 start = Vec3::Zero();
    Vec3 goal = Vec3::Zero();
    double duration = 0.0;
    std::optional<double> overshoot;  // [%]
    std::optional<double> settling;   // [s]
    bool timed_out = false;

    bool operator==(const LegMetrics&) const = default;
};

struct LyapunovSummary {
    bool pass = true;
    std::size_t checked_steps = 0;
    std::size_t increases = 0;
    double max_increase = 0.0;
    std::size_t excluded_steps = 0;
    std::vector<TimeInterval> excluded;

    bool operator==(const LyapunovSummary&) const = default;
};

struct RunMetrics {
    std::string scenario;     // scenario name
    std::string scenario_id;  // identity of everything except the controller
    std::string controller;
    std::string plant;
    std::vector<LegMetrics> legs;
    std::optional<double> worst_overshoot;  // [%] max over legs
    std::optional<double> worst_settling;   // [s] absent if any leg failed to settle
    std::size_t unsettled_legs = 0;
    std::optional<double> lap_time;         // [s] absent unless the mission completed
    double min_clearance = 0.0;             // [m] +infinity without obstacles
    std::size_t collisions = 0;
    double max_speed = 0.0;                 // [m/s]
    std::size_t saturated_steps = 0;
    bool mission_complete = false;
    LyapunovSummary lyapunov;

    bool operator==(const RunMetrics&) const = default;
};

struct MetricsOptions {
    double settling_band = 0.05;
    MonitorOptions monitor;
};

RunMetrics evaluate(const Scenario& scenario, const TrajectoryLog& log,
                    const MetricsOptions& options = {});

/// One column of a comparison; deltas are relative to the first run.
struct ComparisonRow {
    std::string controller;
    std::optional<double> worst_overshoot;
    std::optional<double> worst_settling;
    std::optional<double> lap_time;
    double min_clearance = 0.0;
    std::size_t collisions = 0;
    double max_speed = 0.0;
    bool lyapunov_pass = true;
    std::optional<double> delta_overshoot;
    std::optional<double> delta_settling;
    std::optional<double> delta_lap_time;
    std::optional<double> delta_clearance;

    bool operator==(const ComparisonRow&) const = default;
};

struct ComparisonReport {
    std::string scenario;
    std::string scenario_id;
    std::string plant;
    std::vector<ComparisonRow> rows;

    bool operator==(const ComparisonReport&) const = default;
};

/// Throws InvalidArgument if the runs come from different scenarios.
ComparisonReport compare(const std::vector<RunMetrics>& runs);
ComparisonReport compare(const RunMetrics& a, const RunMetrics& b);

/// Fixed-width table for terminals.
std::string render_text(const ComparisonReport& report);

struct TrendResult {
    std::string name;
    bool pass = false;
    std::string detail;
};

/// The PFC-versus-ePFC expectations: ePFC overshoot at most 2% and below
/// PFC's, PFC overshoot at least 10%, ePFC settles no later, neither collides,
/// and ePFC keeps the wider clearance.
std::vector<TrendResult> check_trends(const RunMetrics& pfc, const RunMetrics& epfc);

}  // namespace pfsim
