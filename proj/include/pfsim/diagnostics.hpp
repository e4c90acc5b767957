// Numerical Lyapunov monitor for closed-loop runs.
//
// L = 1/2 lambda1 |p_dt|^2 + 1/2 lambda2 |v_dt|^2 with p_dt, v_dt the drone
// position and velocity relative to the commanded goal.
#pragma once

#include <cstddef>
#include <vector>

#include "pfsim/scenario.hpp"

namespace pfsim {

double lyapunov_value(const Vec3& p_dt, const Vec3& v_dt, double lambda1, double lambda2);

struct LyapunovSample {
    double t = 0.0;
    double value = 0.0;
    double delta = 0.0;          // value minus previous sample's value; 0 for the first
    double relative_accel = 0.0; // |v_dt(t) - v_dt(t - dt)| / dt; 0 for the first
    bool excluded = false;
};

struct TimeInterval {
    double start = 0.0;
    double end = 0.0;

    bool operator==(const TimeInterval&) const = default;
};

struct MonitorOptions {
    double relative_tolerance = 1e-9;  // allowed rise: tol * max(1, L_prev)
    std::size_t warmup_steps = 1;      // leading steps never judged
    bool exclude_saturated = true;     // the clipped law is outside the proof's assumptions
};

struct LyapunovReport {
    std::vector<LyapunovSample> samples;
    std::size_t checked_steps = 0;
    std::size_t increases = 0;           // judged steps whose rise exceeded tolerance
    double max_increase = 0.0;           // largest rise among judged steps
    std::size_t excluded_steps = 0;
    std::vector<TimeInterval> excluded;  // merged runs of excluded steps
    bool pass = true;
};

/// Judges every step whose predecessor and itself are free of repulsion, that
/// does not cross a waypoint switch and (by default) whose command was not
/// clipped to the speed limit. Throws InvalidArgument for an empty log.
LyapunovReport monitor(const TrajectoryLog& log, const PfcGains& gains,
                       const MonitorOptions& options = {});

}  // namespace pfsim
