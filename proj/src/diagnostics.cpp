#include "pfsim/diagnostics.hpp"

#include <algorithm>

#include "pfsim/errors.hpp"

namespace pfsim {

double lyapunov_value(const Vec3& p_dt, const Vec3& v_dt, double lambda1, double lambda2) {
    return 0.5 * lambda1 * p_dt.squaredNorm() + 0.5 * lambda2 * v_dt.squaredNorm();
}

namespace {

bool disturbed(const TrajectoryRecord& r) { return r.terms.any_repulsion(); }

}  // namespace

LyapunovReport monitor(const TrajectoryLog& log, const PfcGains& gains,
                       const MonitorOptions& options) {
    if (log.records.empty()) {
        throw InvalidArgument("monitor: trajectory log is empty");
    }
    LyapunovReport report;
    report.samples.reserve(log.records.size());

    Vec3 prev_v = Vec3::Zero();
    for (std::size_t k = 0; k < log.records.size(); ++k) {
        const TrajectoryRecord& r = log.records[k];
        const Vec3 p_dt = r.drone.position - r.goal;
        const Vec3 v_dt = r.drone.velocity - r.target.velocity;

        LyapunovSample s;
        s.t = r.t;
        s.value = lyapunov_value(p_dt, v_dt, gains.lambda1, gains.lambda2);
        if (k > 0) {
            const TrajectoryRecord& prev = log.records[k - 1];
            s.delta = s.value - report.samples.back().value;
            if (log.dt > 0.0) {
                s.relative_accel = (v_dt - prev_v).norm() / log.dt;
            }
            s.excluded = disturbed(r) || disturbed(prev) ||
                         r.waypoint_index != prev.waypoint_index ||
                         (options.exclude_saturated && prev.saturated());
        }
        prev_v = v_dt;

        if (k >= options.warmup_steps && k > 0) {
            if (s.excluded) {
                ++report.excluded_steps;
                if (!report.excluded.empty() &&
                    report.samples.back().excluded && report.excluded.back().end == report.samples.back().t) {
                    report.excluded.back().end = s.t;
                } else {
                    report.excluded.push_back({log.records[k - 1].t, s.t});
                }
            } else {
                ++report.checked_steps;
                const double allowed =
                    options.relative_tolerance * std::max(1.0, report.samples.back().value);
                if (s.delta > allowed) {
                    ++report.increases;
                    report.pass = false;
                }
                report.max_increase = std::max(report.max_increase, s.delta);
            }
        }
        report.samples.push_back(s);
    }
    return report;
}

}  // namespace pfsim
