#include "pfsim/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "pfsim/errors.hpp"
#include "pfsim/io.hpp"

namespace pfsim {

namespace {

constexpr double kZeroStep = 1e-9;
constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

std::vector<Leg> legs(const TrajectoryLog& log) {
    std::vector<Leg> out;
    if (log.records.empty()) {
        return out;
    }
    Vec3 start = log.records.front().drone.position;
    std::size_t begin = 0;
    for (const AdvanceEvent& e : log.advances) {
        const std::size_t end = std::min(e.record_index, log.records.size());
        if (end <= begin) {
            continue;
        }
        Leg leg;
        leg.index = out.size();
        leg.begin = begin;
        leg.end = end;
        leg.start = start;
        leg.goal = log.records[begin].goal;
        out.push_back(leg);
        start = leg.goal;
        begin = end;
    }
    // A tail that never completed its waypoint, or a single-leg mission.
    // After a completed mission the only remaining record is the final one.
    const bool mission_tail = log.mission_complete && !out.empty();
    if (begin < log.records.size() && !mission_tail) {
        Leg leg;
        leg.index = out.size();
        leg.begin = begin;
        leg.end = log.records.size();
        leg.start = start;
        leg.goal = log.records.back().goal;
        out.push_back(leg);
    }
    return out;
}

int dominant_axis(const Leg& leg) {
    Eigen::Index axis = 0;
    (leg.goal - leg.start).cwiseAbs().maxCoeff(&axis);
    return static_cast<int>(axis);
}

std::optional<double> overshoot(const TrajectoryLog& log, const Leg& leg) {
    const int a = dominant_axis(leg);
    const double step = leg.goal[a] - leg.start[a];
    if (std::abs(step) < kZeroStep || leg.begin >= leg.end) {
        return std::nullopt;
    }
    const double sign = step > 0.0 ? 1.0 : -1.0;
    double peak = 0.0;
    for (std::size_t k = leg.begin; k < leg.end; ++k) {
        peak = std::max(peak, sign * (log.records[k].drone.position[a] - leg.goal[a]));
    }
    return 100.0 * peak / std::abs(step);
}

std::optional<double> settling_time(const TrajectoryLog& log, const Leg& leg, double band) {
    const int a = dominant_axis(leg);
    const double step = leg.goal[a] - leg.start[a];
    if (std::abs(step) < kZeroStep || leg.begin >= leg.end) {
        return std::nullopt;
    }
    const double tolerance = band * std::abs(step);
    std::size_t settled_from = leg.begin;
    for (std::size_t k = leg.begin; k < leg.end; ++k) {
        if (std::abs(log.records[k].drone.position[a] - leg.goal[a]) > tolerance) {
            settled_from = k + 1;
        }
    }
    if (settled_from >= leg.end) {
        return std::nullopt;
    }
    return log.records[settled_from].t - log.records[leg.begin].t;
}

namespace {

double clearance_at(const TrajectoryRecord& r, const std::vector<Obstacle>& obstacles) {
    double best = kInf;
    for (const Obstacle& o : obstacles) {
        const Obstacle now = obstacle_at(o, r.t);
        best = std::min(best, (r.drone.position - now.position).norm() - now.radius);
    }
    return best;
}

}  // namespace

double min_clearance(const TrajectoryLog& log, const std::vector<Obstacle>& obstacles) {
    double best = kInf;
    for (const TrajectoryRecord& r : log.records) {
        best = std::min(best, clearance_at(r, obstacles));
    }
    return best;
}

std::size_t collisions(const TrajectoryLog& log, const std::vector<Obstacle>& obstacles) {
    std::size_t count = 0;
    bool inside = false;
    for (const TrajectoryRecord& r : log.records) {
        const bool hit = clearance_at(r, obstacles) <= 0.0;
        if (hit && !inside) {
            ++count;
        }
        inside = hit;
    }
    return count;
}

RunMetrics evaluate(const Scenario& scenario, const TrajectoryLog& log,
                    const MetricsOptions& options) {
    RunMetrics m;
    m.scenario = scenario.name;
    m.scenario_id = scenario_identity(scenario);
    m.controller = std::string(to_string(scenario.controller));
    m.plant = std::string(to_string(scenario.plant));
    m.mission_complete = log.mission_complete;

    for (const Leg& leg : legs(log)) {
        LegMetrics lm;
        lm.index = leg.index;
        lm.start = leg.start;
        lm.goal = leg.goal;
        lm.duration = log.records[leg.end - 1].t - log.records[leg.begin].t;
        lm.overshoot = overshoot(log, leg);
        lm.settling = settling_time(log, leg, options.settling_band);
        if (leg.index < log.advances.size()) {
            lm.timed_out = log.advances[leg.index].timed_out;
        }
        if (lm.overshoot) {
            m.worst_overshoot = std::max(m.worst_overshoot.value_or(0.0), *lm.overshoot);
        }
        const int a = dominant_axis(leg);
        if (std::abs(leg.goal[a] - leg.start[a]) >= kZeroStep) {
            if (lm.settling) {
                m.worst_settling = std::max(m.worst_settling.value_or(0.0), *lm.settling);
            } else {
                ++m.unsettled_legs;
            }
        }
        m.legs.push_back(lm);
    }
    if (m.unsettled_legs > 0) {
        m.worst_settling.reset();
    }
    if (log.mission_complete && !log.advances.empty()) {
        m.lap_time = log.advances.back().t;
    }

    m.min_clearance = min_clearance(log, scenario.obstacles);
    m.collisions = collisions(log, scenario.obstacles);
    for (const TrajectoryRecord& r : log.records) {
        m.max_speed = std::max(m.max_speed, r.drone.velocity.norm());
        if (r.saturated()) {
            ++m.saturated_steps;
        }
    }

    if (!log.records.empty()) {
        const LyapunovReport report = monitor(log, scenario.gains, options.monitor);
        m.lyapunov.pass = report.pass;
        m.lyapunov.checked_steps = report.checked_steps;
        m.lyapunov.increases = report.increases;
        m.lyapunov.max_increase = report.max_increase;
        m.lyapunov.excluded_steps = report.excluded_steps;
        m.lyapunov.excluded = report.excluded;
    }
    return m;
}

// ---------------------------------------------------------------------------

namespace {

std::optional<double> delta(const std::optional<double>& a, const std::optional<double>& b) {
    if (!a || !b) {
        return std::nullopt;
    }
    return *b - *a;
}

}  // namespace

ComparisonReport compare(const std::vector<RunMetrics>& runs) {
    if (runs.empty()) {
        throw InvalidArgument("compare: no runs given");
    }
    ComparisonReport report;
    report.scenario = runs.front().scenario;
    report.scenario_id = runs.front().scenario_id;
    report.plant = runs.front().plant;
    const RunMetrics& base = runs.front();
    for (const RunMetrics& r : runs) {
        if (r.scenario_id != base.scenario_id) {
            throw InvalidArgument("compare: runs come from different scenarios ('" +
                                  base.scenario + "' " + base.scenario_id + " vs '" +
                                  r.scenario + "' " + r.scenario_id + ")");
        }
        ComparisonRow row;
        row.controller = r.controller;
        row.worst_overshoot = r.worst_overshoot;
        row.worst_settling = r.worst_settling;
        row.lap_time = r.lap_time;
        row.min_clearance = r.min_clearance;
        row.collisions = r.collisions;
        row.max_speed = r.max_speed;
        row.lyapunov_pass = r.lyapunov.pass;
        row.delta_overshoot = delta(base.worst_overshoot, r.worst_overshoot);
        row.delta_settling = delta(base.worst_settling, r.worst_settling);
        row.delta_lap_time = delta(base.lap_time, r.lap_time);
        if (std::isfinite(base.min_clearance) && std::isfinite(r.min_clearance)) {
            row.delta_clearance = r.min_clearance - base.min_clearance;
        }
        report.rows.push_back(row);
    }
    return report;
}

ComparisonReport compare(const RunMetrics& a, const RunMetrics& b) { return compare({a, b}); }

namespace {

std::string cell(const std::optional<double>& v, const char* fmt = "%.3f") {
    if (!v) {
        return "-";
    }
    char buf[64];
    std::snprintf(buf, sizeof buf, fmt, *v);
    return buf;
}

std::string cell(double v, const char* fmt = "%.3f") {
    if (std::isinf(v)) {
        return "inf";
    }
    return cell(std::optional<double>(v), fmt);
}

}  // namespace

std::string render_text(const ComparisonReport& report) {
    std::string out = "scenario " + report.scenario + " (" + report.scenario_id + "), plant " +
                      report.plant + "\n";
    char line[256];
    std::snprintf(line, sizeof line, "%-10s %12s %12s %10s %11s %10s %10s %9s\n",
                  "controller", "overshoot%", "settling[s]", "lap[s]", "clearance", "collisions",
                  "vmax", "lyapunov");
    out += line;
    for (const ComparisonRow& r : report.rows) {
        std::snprintf(line, sizeof line, "%-10s %12s %12s %10s %11s %10zu %10s %9s\n",
                      r.controller.c_str(), cell(r.worst_overshoot, "%.2f").c_str(),
                      cell(r.worst_settling, "%.2f").c_str(), cell(r.lap_time, "%.2f").c_str(),
                      cell(r.min_clearance).c_str(), r.collisions, cell(r.max_speed).c_str(),
                      r.lyapunov_pass ? "PASS" : "FAIL");
        out += line;
    }
    for (std::size_t i = 1; i < report.rows.size(); ++i) {
        const ComparisonRow& r = report.rows[i];
        std::snprintf(line, sizeof line,
                      "delta %s - %s: overshoot %s, settling %s, lap %s, clearance %s\n",
                      r.controller.c_str(), report.rows.front().controller.c_str(),
                      cell(r.delta_overshoot, "%+.2f").c_str(),
                      cell(r.delta_settling, "%+.2f").c_str(),
                      cell(r.delta_lap_time, "%+.2f").c_str(),
                      cell(r.delta_clearance, "%+.3f").c_str());
        out += line;
    }
    return out;
}

std::vector<TrendResult> check_trends(const RunMetrics& pfc, const RunMetrics& epfc) {
    std::vector<TrendResult> out;
    const auto add = [&](std::string name, bool pass, std::string detail) {
        out.push_back({std::move(name), pass, std::move(detail)});
    };
    const std::string po = cell(pfc.worst_overshoot, "%.2f%%");
    const std::string eo = cell(epfc.worst_overshoot, "%.2f%%");

    add("epfc-overshoot-small", epfc.worst_overshoot && *epfc.worst_overshoot <= 2.0,
        "epfc " + eo + " (limit 2%)");
    add("epfc-overshoot-below-pfc",
        epfc.worst_overshoot && pfc.worst_overshoot && *epfc.worst_overshoot < *pfc.worst_overshoot,
        "epfc " + eo + " vs pfc " + po);
    add("pfc-overshoot-large", pfc.worst_overshoot && *pfc.worst_overshoot >= 10.0,
        "pfc " + po + " (floor 10%)");
    // An unsettled run compares as infinitely slow.
    const double ps = pfc.worst_settling.value_or(kInf);
    const double es = epfc.worst_settling.value_or(kInf);
    add("epfc-settles-no-later", epfc.worst_settling && es <= ps,
        "epfc " + cell(epfc.worst_settling, "%.2fs") + " vs pfc " +
            cell(pfc.worst_settling, "%.2fs"));
    add("no-collisions", pfc.collisions == 0 && epfc.collisions == 0,
        "pfc " + std::to_string(pfc.collisions) + ", epfc " + std::to_string(epfc.collisions));
    add("epfc-wider-clearance", epfc.min_clearance > pfc.min_clearance,
        "epfc " + cell(epfc.min_clearance) + " vs pfc " + cell(pfc.min_clearance));
    return out;
}

}  // namespace pfsim
