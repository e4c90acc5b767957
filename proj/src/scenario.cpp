#include "pfsim/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "pfsim/errors.hpp"

namespace pfsim {

namespace {

void require(bool ok, const std::string& field, const char* constraint) {
    if (!ok) {
        throw ValidationError(field, constraint);
    }
}

void require_finite(const Vec3& v, const std::string& field) {
    require(is_finite(v), field, "must be finite");
}

constexpr double kTimeTolerance = 1e-9;

}  // namespace

std::string_view to_string(ControllerKind kind) {
    return kind == ControllerKind::kPfc ? "pfc" : "epfc";
}

std::string_view to_string(PlantKind kind) {
    switch (kind) {
        case PlantKind::kKinematic:
            return "kinematic";
        case PlantKind::kLag:
            return "lag";
        case PlantKind::kFull:
            return "full";
    }
    return "lag";
}

ControllerKind parse_controller(std::string_view name) {
    if (name == "pfc") return ControllerKind::kPfc;
    if (name == "epfc") return ControllerKind::kEpfc;
    throw ValidationError("controller", "must be one of pfc, epfc (got '" + std::string(name) + "')");
}

PlantKind parse_plant(std::string_view name) {
    if (name == "kinematic") return PlantKind::kKinematic;
    if (name == "lag") return PlantKind::kLag;
    if (name == "full") return PlantKind::kFull;
    throw ValidationError("plant.kind",
                          "must be one of kinematic, lag, full (got '" + std::string(name) + "')");
}

// ---------------------------------------------------------------------------

WaypointProgress::WaypointProgress(const WaypointSequence& seq) : seq_(seq) {}

bool WaypointProgress::update(double t, const Vec3& drone_position) {
    if (complete()) {
        return false;
    }
    const Waypoint& wp = seq_.waypoints[index_];
    if ((drone_position - wp.position).norm() <= seq_.acquisition_radius) {
        if (!arrival_) {
            arrival_ = t;
        }
    } else {
        arrival_.reset();
    }

    const bool dwelled = arrival_ && t - *arrival_ >= wp.dwell - kTimeTolerance;
    const bool timed_out = !dwelled && t - leg_start_ >= seq_.leg_timeout - kTimeTolerance;
    if (!dwelled && !timed_out) {
        return false;
    }
    timed_out_ = timed_out;
    ++index_;
    leg_start_ = t;
    arrival_.reset();
    return true;
}

namespace {

KinematicState path_state(const ParametricPath& path, double t) {
    const auto& v = path.vertices;
    if (v.size() == 1) {
        return {v.front(), Vec3::Zero()};
    }
    const std::size_t segments = path.closed ? v.size() : v.size() - 1;
    std::vector<double> lengths(segments);
    double perimeter = 0.0;
    for (std::size_t i = 0; i < segments; ++i) {
        lengths[i] = (v[(i + 1) % v.size()] - v[i]).norm();
        perimeter += lengths[i];
    }
    if (perimeter <= 0.0) {
        return {v.front(), Vec3::Zero()};
    }
    double s = path.speed * t;
    if (path.closed) {
        s = std::fmod(s, perimeter);
    } else if (s >= perimeter) {
        return {v.back(), Vec3::Zero()};
    }
    for (std::size_t i = 0; i < segments; ++i) {
        if (lengths[i] <= 0.0) {
            continue;
        }
        if (s < lengths[i] || i + 1 == segments) {
            const Vec3 dir = (v[(i + 1) % v.size()] - v[i]) / lengths[i];
            return {v[i] + std::min(s, lengths[i]) * dir, path.speed * dir};
        }
        s -= lengths[i];
    }
    return {v.front(), Vec3::Zero()};
}

}  // namespace

KinematicState target_state(const TargetSpec& spec, double t, const WaypointProgress* progress) {
    return std::visit(
        [&](const auto& target) -> KinematicState {
            using T = std::decay_t<decltype(target)>;
            if constexpr (std::is_same_v<T, StaticPoint>) {
                return {target.position, Vec3::Zero()};
            } else if constexpr (std::is_same_v<T, WaypointSequence>) {
                std::size_t index = progress != nullptr ? progress->index() : 0;
                index = std::min(index, target.waypoints.size() - 1);
                return {target.waypoints[index].position, Vec3::Zero()};
            } else {
                return path_state(target, t);
            }
        },
        spec);
}

// ---------------------------------------------------------------------------

void Scenario::validate() const {
    params.validate();
    gains.validate();
    lag.validate();
    cascade.validate();
    require(std::isfinite(dt) && dt > 0.0, "sim.dt", "must be finite and > 0");
    require(plant != PlantKind::kFull || dt <= kMaxStep, "sim.dt",
            "must not exceed the rigid-body step limit for the full plant");
    require(std::isfinite(t_end) && t_end >= 0.0, "sim.t_end", "must be finite and >= 0");
    require(std::isfinite(standoff) && standoff >= 0.0, "sim.standoff", "must be finite and >= 0");
    require(std::isfinite(yaw_gain) && yaw_gain > 0.0, "gains.yaw_gain", "must be finite and > 0");
    require_finite(initial_position, "initial.position");
    require(std::isfinite(initial_yaw), "initial.yaw", "must be finite");

    for (std::size_t i = 0; i < obstacles.size(); ++i) {
        const std::string field = "obstacles[" + std::to_string(i) + "]";
        require_finite(obstacles[i].position, field + ".position");
        require_finite(obstacles[i].velocity, field + ".velocity");
        require(std::isfinite(obstacles[i].radius) && obstacles[i].radius >= 0.0,
                field + ".radius", "must be finite and >= 0");
    }

    std::visit(
        [](const auto& target) {
            using T = std::decay_t<decltype(target)>;
            if constexpr (std::is_same_v<T, StaticPoint>) {
                require_finite(target.position, "target.position");
            } else if constexpr (std::is_same_v<T, WaypointSequence>) {
                require(!target.waypoints.empty(), "target.waypoints", "must not be empty");
                for (std::size_t i = 0; i < target.waypoints.size(); ++i) {
                    const std::string field = "target.waypoints[" + std::to_string(i) + "]";
                    require_finite(target.waypoints[i].position, field + ".position");
                    require(std::isfinite(target.waypoints[i].dwell) &&
                                target.waypoints[i].dwell >= 0.0,
                            field + ".dwell", "must be finite and >= 0");
                }
                require(std::isfinite(target.acquisition_radius) &&
                            target.acquisition_radius > 0.0,
                        "target.acquisition_radius", "must be finite and > 0");
                require(std::isfinite(target.leg_timeout) && target.leg_timeout > 0.0,
                        "target.leg_timeout", "must be finite and > 0");
            } else {
                require(!target.vertices.empty(), "target.vertices", "must not be empty");
                for (std::size_t i = 0; i < target.vertices.size(); ++i) {
                    require_finite(target.vertices[i],
                                   "target.vertices[" + std::to_string(i) + "]");
                }
                require(std::isfinite(target.speed) && target.speed >= 0.0, "target.speed",
                        "must be finite and >= 0");
            }
        },
        target);
}

Obstacle obstacle_at(const Obstacle& o, double t) {
    Obstacle moved = o;
    moved.position = o.position + t * o.velocity;
    return moved;
}

// ---------------------------------------------------------------------------

namespace {

Vec3 standoff_goal(const Vec3& target, const Vec3& drone, double standoff, double eps) {
    if (standoff <= 0.0) {
        return target;
    }
    Vec3 bearing = drone - target;
    bearing.z() = 0.0;
    const double dist = bearing.norm();
    if (dist <= eps) {
        return target;
    }
    return target + standoff * bearing / dist;
}

}  // namespace

TrajectoryLog run(const Scenario& scenario) {
    scenario.validate();

    TrajectoryLog log;
    log.dt = scenario.dt;

    const auto* waypoints = std::get_if<WaypointSequence>(&scenario.target);
    std::optional<WaypointProgress> progress;
    if (waypoints != nullptr) {
        progress.emplace(*waypoints);
    }

    RigidBodyState state;
    state.position = scenario.initial_position;
    state.attitude.yaw = wrap_angle(scenario.initial_yaw);

    const auto steps = static_cast<std::size_t>(std::llround(scenario.t_end / scenario.dt));
    log.records.reserve(steps + 1);
    std::vector<Obstacle> obstacles(scenario.obstacles.size());
    double held_heading = state.attitude.yaw;

    for (std::size_t k = 0;; ++k) {
        const double t = static_cast<double>(k) * scenario.dt;
        for (std::size_t i = 0; i < obstacles.size(); ++i) {
            obstacles[i] = obstacle_at(scenario.obstacles[i], t);
        }

        TrajectoryRecord rec;
        rec.t = t;
        rec.target = target_state(scenario.target, t, progress ? &*progress : nullptr);
        rec.goal = standoff_goal(rec.target.position, state.position, scenario.standoff,
                                 scenario.gains.eps_p);
        rec.waypoint_index = progress ? progress->index() : 0;

        const KinematicState goal{rec.goal, rec.target.velocity};
        if (scenario.controller == ControllerKind::kPfc) {
            rec.terms = pfc_terms(state.position, rec.goal, obstacles, scenario.gains);
        } else {
            rec.terms = epfc_terms({state.position, state.velocity}, goal, obstacles,
                                   scenario.gains);
        }
        if (!is_finite(rec.terms.command)) {
            throw NumericAbort(log.records.size(), "non-finite controller command");
        }

        if (scenario.face_target) {
            const HeadingCommand heading = yaw_to_face_target(
                state.position, rec.target.position, held_heading, scenario.gains.eps_p);
            held_heading = heading.yaw;
            rec.yaw_rate_command =
                scenario.yaw_gain * wrap_angle(heading.yaw - state.attitude.yaw);
        }
        rec.command_body = to_body_frame(rec.terms.command, state.attitude.yaw);

        if (scenario.plant == PlantKind::kKinematic) {
            // Velocity follows the command instantly.
            state.velocity = rec.terms.command;
            state.body_rates = {0.0, 0.0,
                                std::clamp(rec.yaw_rate_command, -scenario.lag.max_yaw_rate,
                                           scenario.lag.max_yaw_rate)};
        }
        rec.drone = state;

        const bool finished = progress && progress->complete() && scenario.stop_when_complete;
        if (k >= steps || finished) {
            log.records.push_back(rec);
            break;
        }

        switch (scenario.plant) {
            case PlantKind::kKinematic:
                state.position += scenario.dt * state.velocity;
                state.attitude.yaw =
                    wrap_angle(state.attitude.yaw + scenario.dt * state.body_rates.z());
                break;
            case PlantKind::kLag:
                state = velocity_plant_step(state, rec.command_body, rec.yaw_rate_command,
                                            scenario.lag, scenario.dt);
                break;
            case PlantKind::kFull: {
                const CascadedStepResult out =
                    cascaded_plant_step(state, rec.command_body, rec.yaw_rate_command,
                                        scenario.cascade, scenario.params, scenario.dt);
                state = out.state;
                rec.motor_saturated = out.saturated;
                break;
            }
        }
        log.records.push_back(rec);

        if (!is_finite(state)) {
            throw NumericAbort(log.records.size(), "non-finite drone state");
        }
        if (progress) {
            const std::size_t before = progress->index();
            const double t_next = static_cast<double>(k + 1) * scenario.dt;
            if (progress->update(t_next, state.position)) {
                log.advances.push_back({log.records.size(), t_next, before,
                                        progress->last_advance_timed_out()});
            }
        }
    }
    log.mission_complete = progress && progress->complete();
    return log;
}

// ---------------------------------------------------------------------------

namespace {

constexpr double kCourseAltitude = 1.0;
constexpr double kWaypointKeepOut = 2.0;
constexpr double kStartKeepOut = 1.0;

Vec3 at_altitude(double x, double y) { return {x, y, -kCourseAltitude}; }

WaypointSequence course(std::initializer_list<std::pair<double, double>> xy, double dwell) {
    WaypointSequence seq;
    for (const auto& [x, y] : xy) {
        seq.waypoints.push_back({at_altitude(x, y), dwell});
    }
    return seq;
}

WaypointSequence simulation_course() {
    return course({{2.5, -1.0}, {2.5, 1.0}, {-2.5, 1.0}, {-2.5, -1.0}}, 2.0);
}

// Uniform double in [0, 1) from the top 53 bits; independent of the
// standard library's distribution implementations.
double unit_uniform(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace

std::vector<Obstacle> random_obstacles(std::uint64_t seed, std::size_t count,
                                       const std::vector<KeepOut>& keep_out) {
    constexpr double kMinX = -3.5, kMaxX = 3.5, kMinY = -2.5, kMaxY = 2.5;
    constexpr double kClearOfEachOther = 1.0;
    constexpr int kMaxDraws = 100000;

    std::mt19937_64 rng(seed);
    std::vector<Obstacle> out;
    for (int draw = 0; draw < kMaxDraws && out.size() < count; ++draw) {
        const double x = kMinX + (kMaxX - kMinX) * unit_uniform(rng);
        const double y = kMinY + (kMaxY - kMinY) * unit_uniform(rng);
        const Vec3 p = at_altitude(x, y);
        const auto near = [&](const Vec3& q, double r) {
            return (Vec3(p - q).head<2>()).norm() < r;
        };
        if (std::any_of(keep_out.begin(), keep_out.end(),
                        [&](const KeepOut& k) { return near(k.center, k.radius); })) {
            continue;
        }
        if (std::any_of(out.begin(), out.end(),
                        [&](const Obstacle& o) { return near(o.position, kClearOfEachOther); })) {
            continue;
        }
        Obstacle o;
        o.position = p;
        out.push_back(o);
    }
    return out;
}

std::vector<std::string> builtin_names() {
    return {"sim-course",     "exp-course",          "multi-obstacle",
            "static-target",  "static-target-obstacle", "dynamic-square"};
}

Scenario builtin_scenario(std::string_view name, std::optional<std::uint64_t> seed) {
    Scenario s;
    s.name = std::string(name);
    s.initial_position = at_altitude(0.0, 0.0);

    if (name == "sim-course") {
        s.target = simulation_course();
        s.obstacles = {Obstacle{at_altitude(1.0, 1.0), Vec3::Zero(), 0.25}};
    } else if (name == "exp-course") {
        s.target = course({{1.5, -0.5}, {1.5, 0.5}, {-1.5, 0.5}, {-1.5, -0.5}}, 2.0);
        s.obstacles = {Obstacle{at_altitude(0.0, 0.6), Vec3::Zero(), 0.15}};
    } else if (name == "multi-obstacle") {
        s.seed = seed.value_or(7);
        WaypointSequence seq = simulation_course();
        // Far enough from each waypoint that the residual push at the
        // waypoint stays well inside the acquisition radius.
        std::vector<KeepOut> keep_out{{s.initial_position, kStartKeepOut}};
        for (const auto& wp : seq.waypoints) {
            keep_out.push_back({wp.position, kWaypointKeepOut});
        }
        s.target = seq;
        s.obstacles = random_obstacles(s.seed, 6, keep_out);
    } else if (name == "static-target") {
        s.target = StaticPoint{at_altitude(4.2, 0.0)};
        s.standoff = 1.0;
        s.face_target = true;
        s.t_end = 20.0;
    } else if (name == "static-target-obstacle") {
        s.target = StaticPoint{at_altitude(5.2, 0.0)};
        s.obstacles = {Obstacle{at_altitude(2.6, 0.15), Vec3::Zero(), 0.25}};
        s.standoff = 1.0;
        s.face_target = true;
        s.t_end = 30.0;
    } else if (name == "dynamic-square") {
        s.target = ParametricPath{{at_altitude(2.0, -1.5), at_altitude(2.0, 1.5),
                                   at_altitude(-2.0, 1.5), at_altitude(-2.0, -1.5)},
                                  0.3, true};
        s.initial_position = at_altitude(0.0, -1.5);
        s.standoff = 1.0;
        s.face_target = true;
        s.t_end = 60.0;
    } else {
        std::string names;
        for (const auto& n : builtin_names()) {
            names += (names.empty() ? "" : ", ") + n;
        }
        throw ValidationError("builtin", "unknown scenario '" + std::string(name) +
                                             "'; available: " + names);
    }
    if (seed && name != "multi-obstacle") {
        s.seed = *seed;
    }
    return s;
}

std::vector<Scenario> builtin_scenarios() {
    std::vector<Scenario> out;
    for (const auto& name : builtin_names()) {
        out.push_back(builtin_scenario(name));
    }
    return out;
}

}  // namespace pfsim
