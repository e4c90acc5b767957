#include "pfsim/io.hpp"

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "pfsim/errors.hpp"

namespace pfsim {

using nlohmann::json;

namespace {

// ---------------------------------------------------------------------------
// Scenario documents

json vec_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

std::string json_type(const json& j) { return j.type_name(); }

double as_double(const json& j, const std::string& field) {
    if (!j.is_number()) {
        throw ValidationError(field, "must be a number (got " + json_type(j) + ")");
    }
    return j.get<double>();
}

Vec3 as_vec3(const json& j, const std::string& field) {
    if (!j.is_array() || j.size() != 3) {
        throw ValidationError(field, "must be an array of 3 numbers");
    }
    return {as_double(j[0], field + "[0]"), as_double(j[1], field + "[1]"),
            as_double(j[2], field + "[2]")};
}

void read_value(const json& j, const std::string& field, double& out) { out = as_double(j, field); }

void read_value(const json& j, const std::string& field, Vec3& out) { out = as_vec3(j, field); }

void read_value(const json& j, const std::string& field, bool& out) {
    if (!j.is_boolean()) {
        throw ValidationError(field, "must be true or false");
    }
    out = j.get<bool>();
}

void read_value(const json& j, const std::string& field, std::uint64_t& out) {
    if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<std::int64_t>() >= 0)) {
        throw ValidationError(field, "must be a non-negative integer");
    }
    out = j.get<std::uint64_t>();
}

void read_value(const json& j, const std::string& field, std::string& out) {
    if (!j.is_string()) {
        throw ValidationError(field, "must be a string");
    }
    out = j.get<std::string>();
}

json value_json(double v) { return v; }
json value_json(bool v) { return v; }
json value_json(std::uint64_t v) { return v; }
json value_json(const Vec3& v) { return vec_json(v); }

/// Reads the keys of one JSON object, recording defaults and rejecting
/// anything it was not asked about.
class Section {
public:
    Section(const json* obj, std::string path, std::vector<std::string>* provenance,
            std::string origin)
        : obj_(obj), path_(std::move(path)), provenance_(provenance), origin_(std::move(origin)) {
        if (obj_ != nullptr && !obj_->is_object()) {
            throw ValidationError(path_, "must be an object");
        }
    }

    std::string field(const std::string& key) const {
        return path_.empty() ? key : path_ + "." + key;
    }

    bool has(const std::string& key) const { return obj_ != nullptr && obj_->contains(key); }

    const json* take(const std::string& key) {
        if (!has(key)) {
            return nullptr;
        }
        used_.insert(key);
        return &obj_->at(key);
    }

    template <typename T>
    void get(const std::string& key, T& out) {
        if (const json* j = take(key)) {
            read_value(*j, field(key), out);
        } else {
            note(key, value_json(out).dump());
        }
    }

    void note(const std::string& key, const std::string& value) {
        if (provenance_ != nullptr) {
            provenance_->push_back(field(key) + " = " + value + " (" + origin_ + ")");
        }
    }

    void finish() const {
        if (obj_ == nullptr) {
            return;
        }
        for (const auto& item : obj_->items()) {
            if (used_.count(item.key()) == 0) {
                throw ValidationError(field(item.key()), "unknown key");
            }
        }
    }

private:
    const json* obj_;
    std::string path_;
    std::vector<std::string>* provenance_;
    std::string origin_;
    std::set<std::string> used_;
};

const json* array_of(const json* j, const std::string& field) {
    if (j != nullptr && !j->is_array()) {
        throw ValidationError(field, "must be an array");
    }
    return j;
}

Obstacle read_obstacle(const json& j, const std::string& field,
                       std::vector<std::string>* provenance) {
    Obstacle o;
    Section s(&j, field, provenance, "default");
    s.get("position", o.position);
    s.get("velocity", o.velocity);
    s.get("radius", o.radius);
    s.finish();
    return o;
}

std::string target_type(const TargetSpec& t) {
    switch (t.index()) {
        case 0:
            return "static";
        case 1:
            return "waypoints";
        default:
            return "path";
    }
}

TargetSpec read_target(const json* j, const TargetSpec& base, const std::string& base_origin,
                       std::vector<std::string>* provenance) {
    const std::string base_type = target_type(base);
    std::string type = base_type;
    if (j != nullptr && j->is_object() && j->contains("type")) {
        read_value(j->at("type"), "target.type", type);
    }
    if (type != "static" && type != "waypoints" && type != "path") {
        throw ValidationError("target.type", "must be one of static, waypoints, path (got '" +
                                                 type + "')");
    }
    // Switching type starts that type from library defaults.
    const bool same = type == base_type;
    const std::string origin = same ? base_origin : "default";
    Section s(j, "target", provenance, origin);
    if (!s.take("type")) {
        s.note("type", json(type).dump());
    }

    if (type == "static") {
        StaticPoint t = same ? std::get<StaticPoint>(base) : StaticPoint{};
        s.get("position", t.position);
        s.finish();
        return t;
    }
    if (type == "waypoints") {
        WaypointSequence t = same ? std::get<WaypointSequence>(base) : WaypointSequence{};
        if (const json* arr = array_of(s.take("waypoints"), "target.waypoints")) {
            t.waypoints.clear();
            for (std::size_t i = 0; i < arr->size(); ++i) {
                const std::string field = "target.waypoints[" + std::to_string(i) + "]";
                Waypoint w;
                Section ws(&(*arr)[i], field, provenance, "default");
                ws.get("position", w.position);
                ws.get("dwell", w.dwell);
                ws.finish();
                t.waypoints.push_back(w);
            }
        } else {
            s.note("waypoints", std::to_string(t.waypoints.size()) + " entries");
        }
        s.get("acquisition_radius", t.acquisition_radius);
        s.get("leg_timeout", t.leg_timeout);
        s.finish();
        return t;
    }
    ParametricPath t = same ? std::get<ParametricPath>(base) : ParametricPath{};
    if (const json* arr = array_of(s.take("vertices"), "target.vertices")) {
        t.vertices.clear();
        for (std::size_t i = 0; i < arr->size(); ++i) {
            t.vertices.push_back(as_vec3((*arr)[i], "target.vertices[" + std::to_string(i) + "]"));
        }
    } else {
        s.note("vertices", std::to_string(t.vertices.size()) + " entries");
    }
    s.get("speed", t.speed);
    s.get("closed", t.closed);
    s.finish();
    return t;
}

json target_json(const TargetSpec& target) {
    return std::visit(
        [](const auto& t) -> json {
            using T = std::decay_t<decltype(t)>;
            json j;
            if constexpr (std::is_same_v<T, StaticPoint>) {
                j["type"] = "static";
                j["position"] = vec_json(t.position);
            } else if constexpr (std::is_same_v<T, WaypointSequence>) {
                j["type"] = "waypoints";
                j["waypoints"] = json::array();
                for (const Waypoint& w : t.waypoints) {
                    j["waypoints"].push_back({{"position", vec_json(w.position)}, {"dwell", w.dwell}});
                }
                j["acquisition_radius"] = t.acquisition_radius;
                j["leg_timeout"] = t.leg_timeout;
            } else {
                j["type"] = "path";
                j["vertices"] = json::array();
                for (const Vec3& v : t.vertices) {
                    j["vertices"].push_back(vec_json(v));
                }
                j["speed"] = t.speed;
                j["closed"] = t.closed;
            }
            return j;
        },
        target);
}

std::pair<std::size_t, std::size_t> line_column(std::string_view text, std::size_t byte) {
    byte = std::min(byte, text.size());
    std::size_t line = 1;
    std::size_t column = 1;
    for (std::size_t i = 0; i < byte; ++i) {
        if (text[i] == '\n') {
            ++line;
            column = 1;
        } else {
            ++column;
        }
    }
    return {line, column};
}

json parse_json_text(std::string_view text) {
    try {
        return json::parse(text.begin(), text.end(), nullptr, true, true);
    } catch (const json::parse_error& e) {
        // nlohmann reports the 1-based offset of the offending byte.
        const std::size_t byte = e.byte > 0 ? e.byte - 1 : 0;
        const auto [line, column] = line_column(text, byte);
        std::string msg = e.what();
        if (const auto pos = msg.find("syntax error"); pos != std::string::npos) {
            msg = msg.substr(pos);
        }
        throw ParseError(line, column, msg);
    }
}

}  // namespace

LoadedScenario scenario_from_json(const json& doc) {
    if (!doc.is_object()) {
        throw ValidationError("document", "must be a JSON object");
    }
    LoadedScenario out;
    auto* prov = &out.provenance;

    Section top(&doc, "", prov, "default");
    if (const json* v = top.take("schema_version")) {
        if (!v->is_number_integer() || v->get<int>() != kSchemaVersion) {
            throw ValidationError("schema_version",
                                  "must be " + std::to_string(kSchemaVersion));
        }
    }

    Scenario& s = out.scenario;
    std::string origin = "default";
    if (const json* b = top.take("builtin")) {
        std::string name;
        read_value(*b, "builtin", name);
        std::optional<std::uint64_t> seed;
        if (doc.contains("sim") && doc["sim"].is_object() && doc["sim"].contains("seed")) {
            std::uint64_t v = 0;
            read_value(doc["sim"]["seed"], "sim.seed", v);
            seed = v;
        }
        s = builtin_scenario(name, seed);
        origin = "builtin " + name;
    }
    Section head(&doc, "", prov, origin);

    if (const json* n = top.take("name")) {
        read_value(*n, "name", s.name);
    } else {
        head.note("name", json(s.name).dump());
    }
    if (const json* c = top.take("controller")) {
        std::string name;
        read_value(*c, "controller", name);
        s.controller = parse_controller(name);
    } else {
        head.note("controller", json(std::string(to_string(s.controller))).dump());
    }

    {
        Section plant(top.take("plant"), "plant", prov, origin);
        if (const json* k = plant.take("kind")) {
            std::string name;
            read_value(*k, "plant.kind", name);
            s.plant = parse_plant(name);
        } else {
            plant.note("kind", json(std::string(to_string(s.plant))).dump());
        }
        Section lag(plant.take("lag"), "plant.lag", prov, origin);
        lag.get("tau", s.lag.time_constant);
        lag.get("v_max", s.lag.max_speed);
        lag.get("tau_yaw", s.lag.yaw_time_constant);
        lag.get("yaw_rate_max", s.lag.max_yaw_rate);
        lag.finish();
        Section cas(plant.take("cascade"), "plant.cascade", prov, origin);
        cas.get("velocity_gain", s.cascade.velocity_gain);
        cas.get("vertical_gain", s.cascade.vertical_gain);
        cas.get("max_tilt", s.cascade.max_tilt);
        cas.get("attitude_kp", s.cascade.attitude_kp);
        cas.get("attitude_kd", s.cascade.attitude_kd);
        cas.get("yaw_rate_gain", s.cascade.yaw_rate_gain);
        cas.finish();
        plant.finish();
    }
    {
        Section p(top.take("params"), "params", prov, origin);
        p.get("m", s.params.mass);
        p.get("g", s.params.gravity);
        p.get("ixx", s.params.ixx);
        p.get("iyy", s.params.iyy);
        p.get("izz", s.params.izz);
        p.get("k_t", s.params.thrust_coeff);
        p.get("k_m", s.params.moment_coeff);
        p.get("l", s.params.arm_length);
        p.get("omega_max", s.params.max_motor_speed);
        p.finish();
    }
    {
        Section g(top.take("gains"), "gains", prov, origin);
        g.get("lambda1", s.gains.lambda1);
        g.get("eta1", s.gains.eta1);
        g.get("p_star", s.gains.p_star);
        g.get("lambda2", s.gains.lambda2);
        g.get("eta2", s.gains.eta2);
        g.get("eta3", s.gains.eta3);
        g.get("eps_p", s.gains.eps_p);
        g.get("eps_v", s.gains.eps_v);
        g.get("v_cmd_max", s.gains.v_cmd_max);
        g.get("yaw_gain", s.yaw_gain);
        g.finish();
    }
    s.target = read_target(top.take("target"), s.target, origin, prov);
    if (const json* arr = array_of(top.take("obstacles"), "obstacles")) {
        s.obstacles.clear();
        for (std::size_t i = 0; i < arr->size(); ++i) {
            s.obstacles.push_back(
                read_obstacle((*arr)[i], "obstacles[" + std::to_string(i) + "]", prov));
        }
    } else {
        head.note("obstacles", std::to_string(s.obstacles.size()) + " entries");
    }
    {
        Section init(top.take("initial"), "initial", prov, origin);
        init.get("position", s.initial_position);
        init.get("yaw", s.initial_yaw);
        init.finish();
    }
    {
        Section sim(top.take("sim"), "sim", prov, origin);
        sim.get("dt", s.dt);
        sim.get("t_end", s.t_end);
        sim.get("seed", s.seed);
        sim.get("standoff", s.standoff);
        sim.finish();
    }
    {
        Section flags(top.take("flags"), "flags", prov, origin);
        flags.get("gate_position_repulsion_on_recede", s.gains.gate_position_repulsion_on_recede);
        flags.get("face_target", s.face_target);
        flags.get("stop_when_complete", s.stop_when_complete);
        flags.finish();
    }
    top.finish();
    s.validate();
    return out;
}

void apply_override(json& doc, std::string_view assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string_view::npos || eq == 0) {
        throw ValidationError(std::string(assignment), "override must look like section.key=value");
    }
    const std::string key(assignment.substr(0, eq));
    const std::string text(assignment.substr(eq + 1));

    json value = json::parse(text, nullptr, false);
    if (value.is_discarded()) {
        value = text;
    }

    json* node = &doc;
    std::string_view rest = key;
    while (true) {
        const auto dot = rest.find('.');
        const std::string part(rest.substr(0, dot));
        if (part.empty()) {
            throw ValidationError(key, "empty path segment");
        }
        json* next = nullptr;
        if (node->is_array()) {
            std::size_t index = 0;
            const auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), index);
            if (ec != std::errc() || ptr != part.data() + part.size() || index >= node->size()) {
                throw ValidationError(key, "array index '" + part + "' out of range");
            }
            next = &(*node)[index];
        } else {
            if (node->is_null()) {
                *node = json::object();
            }
            if (!node->is_object()) {
                throw ValidationError(key, "cannot descend into a non-object value");
            }
            next = &(*node)[part];
        }
        if (dot == std::string_view::npos) {
            *next = value;
            return;
        }
        node = next;
        rest = rest.substr(dot + 1);
    }
}

LoadedScenario parse_scenario(std::string_view text, const std::vector<std::string>& overrides) {
    json doc = parse_json_text(text);
    for (const std::string& o : overrides) {
        apply_override(doc, o);
    }
    LoadedScenario out = scenario_from_json(doc);
    for (const std::string& o : overrides) {
        out.provenance.push_back(o + " (override)");
    }
    return out;
}

LoadedScenario load_scenario(const std::filesystem::path& path,
                             const std::vector<std::string>& overrides) {
    const std::string text = read_text(path);
    try {
        return parse_scenario(text, overrides);
    } catch (const ParseError& e) {
        throw ParseError(e.line(), e.column(), path.string() + ": " + e.detail());
    }
}

LoadedScenario resolve_scenario(const std::string& source,
                                const std::vector<std::string>& overrides) {
    std::error_code ec;
    if (std::filesystem::is_regular_file(source, ec)) {
        return load_scenario(source, overrides);
    }
    if (source.find('/') != std::string::npos || source.ends_with(".json")) {
        throw IoError("cannot read scenario file '" + source + "'");
    }
    json doc = {{"builtin", source}};
    for (const std::string& o : overrides) {
        apply_override(doc, o);
    }
    LoadedScenario out = scenario_from_json(doc);
    for (const std::string& o : overrides) {
        out.provenance.push_back(o + " (override)");
    }
    return out;
}

json scenario_to_json(const Scenario& s) {
    json j;
    j["schema_version"] = kSchemaVersion;
    j["name"] = s.name;
    j["controller"] = std::string(to_string(s.controller));
    j["plant"] = {
        {"kind", std::string(to_string(s.plant))},
        {"lag",
         {{"tau", vec_json(s.lag.time_constant)},
          {"v_max", s.lag.max_speed},
          {"tau_yaw", s.lag.yaw_time_constant},
          {"yaw_rate_max", s.lag.max_yaw_rate}}},
        {"cascade",
         {{"velocity_gain", s.cascade.velocity_gain},
          {"vertical_gain", s.cascade.vertical_gain},
          {"max_tilt", s.cascade.max_tilt},
          {"attitude_kp", s.cascade.attitude_kp},
          {"attitude_kd", s.cascade.attitude_kd},
          {"yaw_rate_gain", s.cascade.yaw_rate_gain}}},
    };
    j["params"] = {{"m", s.params.mass},
                   {"g", s.params.gravity},
                   {"ixx", s.params.ixx},
                   {"iyy", s.params.iyy},
                   {"izz", s.params.izz},
                   {"k_t", s.params.thrust_coeff},
                   {"k_m", s.params.moment_coeff},
                   {"l", s.params.arm_length},
                   {"omega_max", s.params.max_motor_speed}};
    j["gains"] = {{"lambda1", s.gains.lambda1}, {"eta1", s.gains.eta1},
                  {"p_star", s.gains.p_star},   {"lambda2", s.gains.lambda2},
                  {"eta2", s.gains.eta2},       {"eta3", s.gains.eta3},
                  {"eps_p", s.gains.eps_p},     {"eps_v", s.gains.eps_v},
                  {"v_cmd_max", s.gains.v_cmd_max}, {"yaw_gain", s.yaw_gain}};
    j["target"] = target_json(s.target);
    j["obstacles"] = json::array();
    for (const Obstacle& o : s.obstacles) {
        j["obstacles"].push_back({{"position", vec_json(o.position)},
                                  {"velocity", vec_json(o.velocity)},
                                  {"radius", o.radius}});
    }
    j["initial"] = {{"position", vec_json(s.initial_position)}, {"yaw", s.initial_yaw}};
    j["sim"] = {{"dt", s.dt}, {"t_end", s.t_end}, {"seed", s.seed}, {"standoff", s.standoff}};
    j["flags"] = {{"gate_position_repulsion_on_recede", s.gains.gate_position_repulsion_on_recede},
                  {"face_target", s.face_target},
                  {"stop_when_complete", s.stop_when_complete}};
    return j;
}

void save_scenario(const Scenario& scenario, const std::filesystem::path& path) {
    write_text(path, scenario_to_json(scenario).dump(2) + "\n");
}

std::string scenario_identity(const Scenario& scenario) {
    json j = scenario_to_json(scenario);
    j.erase("controller");
    std::uint64_t h = 14695981039346656037ull;  // FNV-1a
    for (const unsigned char c : j.dump()) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

// ---------------------------------------------------------------------------
// Trajectory tables

const std::vector<std::string>& trajectory_columns() {
    static const std::vector<std::string> columns = [] {
        std::vector<std::string> c = {"t",    "px",    "py",  "pz", "vx", "vy", "vz",
                                      "roll", "pitch", "yaw", "tx", "ty", "tz", "cmdx",
                                      "cmdy", "cmdz"};
        for (const char* term : {"term_att_p", "term_rep_p", "term_att_v", "term_rep_v",
                                 "term_close"}) {
            for (const char* axis : {"x", "y", "z"}) {
                c.push_back(std::string(term) + axis);
            }
        }
        c.push_back("gates");
        c.push_back("sat");
        return c;
    }();
    return columns;
}

namespace {

class RowWriter {
public:
    RowWriter(std::string& out, std::size_t row) : out_(out), row_(row) {}

    void number(double v) {
        if (!std::isfinite(v)) {
            throw IoError("refusing to write non-finite value in column '" +
                          trajectory_columns()[column_] + "' of row " + std::to_string(row_));
        }
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.12g", v);
        cell(buf);
    }

    void vec(const Vec3& v) {
        number(v.x());
        number(v.y());
        number(v.z());
    }

    void integer(unsigned long v) { cell(std::to_string(v)); }

    void end() { out_ += '\n'; }

private:
    void cell(const std::string& text) {
        if (column_ > 0) {
            out_ += ',';
        }
        out_ += text;
        ++column_;
    }

    std::string& out_;
    std::size_t row_;
    std::size_t column_ = 0;
};

}  // namespace

std::string trajectory_csv(const TrajectoryLog& log) {
    std::string out;
    const auto& columns = trajectory_columns();
    for (std::size_t i = 0; i < columns.size(); ++i) {
        out += (i ? "," : "") + columns[i];
    }
    out += '\n';
    for (std::size_t k = 0; k < log.records.size(); ++k) {
        const TrajectoryRecord& r = log.records[k];
        RowWriter w(out, k);
        w.number(r.t);
        w.vec(r.drone.position);
        w.vec(r.drone.velocity);
        w.number(r.drone.attitude.roll);
        w.number(r.drone.attitude.pitch);
        w.number(r.drone.attitude.yaw);
        w.vec(r.target.position);
        w.vec(r.terms.command);
        w.vec(r.terms.attract_position);
        w.vec(r.terms.repulse_position);
        w.vec(r.terms.attract_velocity);
        w.vec(r.terms.repulse_velocity);
        w.vec(r.terms.closing);
        w.integer(r.terms.gates);
        w.integer(r.saturated() ? 1 : 0);
        w.end();
    }
    return out;
}

void write_trajectory(const TrajectoryLog& log, const std::filesystem::path& path) {
    write_text(path, trajectory_csv(log));
}

TrajectoryTable parse_trajectory(std::string_view text) {
    TrajectoryTable table;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t eol = text.find('\n', pos);
        if (eol == std::string_view::npos) {
            eol = text.size();
        }
        std::string_view line = text.substr(pos, eol - pos);
        pos = eol + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.remove_suffix(1);
        }
        if (line.empty()) {
            continue;
        }

        std::vector<std::string_view> cells;
        std::size_t start = 0;
        while (true) {
            const std::size_t comma = line.find(',', start);
            cells.push_back(line.substr(start, comma - start));
            if (comma == std::string_view::npos) {
                break;
            }
            start = comma + 1;
        }

        if (table.columns.empty()) {
            for (auto c : cells) {
                table.columns.emplace_back(c);
            }
            continue;
        }
        if (cells.size() != table.columns.size()) {
            throw ParseError(line_no, 1,
                             "expected " + std::to_string(table.columns.size()) + " cells, found " +
                                 std::to_string(cells.size()));
        }
        std::vector<double> row;
        row.reserve(cells.size());
        std::size_t column = 1;
        for (auto c : cells) {
            double v = 0.0;
            const auto [ptr, ec] = std::from_chars(c.data(), c.data() + c.size(), v);
            if (ec != std::errc() || ptr != c.data() + c.size() || !std::isfinite(v)) {
                throw ParseError(line_no, column, "bad number '" + std::string(c) + "'");
            }
            row.push_back(v);
            column += c.size() + 1;
        }
        table.rows.push_back(std::move(row));
    }
    if (table.columns.empty()) {
        throw ParseError(1, 1, "missing header row");
    }
    return table;
}

TrajectoryTable read_trajectory(const std::filesystem::path& path) {
    const std::string text = read_text(path);
    try {
        return parse_trajectory(text);
    } catch (const ParseError& e) {
        throw ParseError(e.line(), e.column(), path.string() + ": " + e.detail());
    }
}

std::string lyapunov_csv(const LyapunovReport& report) {
    std::string out = "t,L,dL,relative_accel,excluded\n";
    char buf[128];
    for (const LyapunovSample& s : report.samples) {
        std::snprintf(buf, sizeof buf, "%.12g,%.12g,%.12g,%.12g,%d\n", s.t, s.value, s.delta,
                      s.relative_accel, s.excluded ? 1 : 0);
        out += buf;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Metrics and comparison documents

namespace {

json opt_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::optional<double> opt_from(const json& j, const char* key) {
    const json& v = j.at(key);
    if (v.is_null()) {
        return std::nullopt;
    }
    return v.get<double>();
}

json clearance_json(double v) { return std::isinf(v) ? json(nullptr) : json(v); }

double clearance_from(const json& j) {
    return j.is_null() ? std::numeric_limits<double>::infinity() : j.get<double>();
}

Vec3 vec_from(const json& j) { return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()}; }

void check_schema(const json& doc, const char* kind) {
    if (doc.value("schema_version", -1) != kSchemaVersion || doc.value("kind", "") != kind) {
        throw ValidationError("schema_version",
                              std::string("expected a version ") + std::to_string(kSchemaVersion) +
                                  " " + kind + " document");
    }
}

}  // namespace

json metrics_to_json(const RunMetrics& m, const std::vector<std::string>& provenance) {
    json j;
    j["schema_version"] = kSchemaVersion;
    j["kind"] = "run-metrics";
    j["scenario"] = m.scenario;
    j["scenario_id"] = m.scenario_id;
    j["controller"] = m.controller;
    j["plant"] = m.plant;
    j["mission_complete"] = m.mission_complete;
    j["legs"] = json::array();
    for (const LegMetrics& l : m.legs) {
        j["legs"].push_back({{"index", l.index},
                             {"start", vec_json(l.start)},
                             {"goal", vec_json(l.goal)},
                             {"duration_s", l.duration},
                             {"overshoot_pct", opt_json(l.overshoot)},
                             {"settling_s", opt_json(l.settling)},
                             {"timed_out", l.timed_out}});
    }
    j["worst_overshoot_pct"] = opt_json(m.worst_overshoot);
    j["worst_settling_s"] = opt_json(m.worst_settling);
    j["unsettled_legs"] = m.unsettled_legs;
    j["lap_time_s"] = opt_json(m.lap_time);
    j["min_clearance_m"] = clearance_json(m.min_clearance);
    j["collisions"] = m.collisions;
    j["max_speed_mps"] = m.max_speed;
    j["saturated_steps"] = m.saturated_steps;
    json excluded = json::array();
    for (const TimeInterval& i : m.lyapunov.excluded) {
        excluded.push_back({i.start, i.end});
    }
    j["lyapunov"] = {{"verdict", m.lyapunov.pass ? "PASS" : "FAIL"},
                     {"checked_steps", m.lyapunov.checked_steps},
                     {"increases", m.lyapunov.increases},
                     {"max_increase", m.lyapunov.max_increase},
                     {"excluded_steps", m.lyapunov.excluded_steps},
                     {"excluded_intervals", excluded}};
    j["provenance"] = provenance;
    return j;
}

RunMetrics metrics_from_json(const json& doc) {
    check_schema(doc, "run-metrics");
    RunMetrics m;
    m.scenario = doc.at("scenario").get<std::string>();
    m.scenario_id = doc.at("scenario_id").get<std::string>();
    m.controller = doc.at("controller").get<std::string>();
    m.plant = doc.at("plant").get<std::string>();
    m.mission_complete = doc.at("mission_complete").get<bool>();
    for (const json& l : doc.at("legs")) {
        LegMetrics lm;
        lm.index = l.at("index").get<std::size_t>();
        lm.start = vec_from(l.at("start"));
        lm.goal = vec_from(l.at("goal"));
        lm.duration = l.at("duration_s").get<double>();
        lm.overshoot = opt_from(l, "overshoot_pct");
        lm.settling = opt_from(l, "settling_s");
        lm.timed_out = l.at("timed_out").get<bool>();
        m.legs.push_back(lm);
    }
    m.worst_overshoot = opt_from(doc, "worst_overshoot_pct");
    m.worst_settling = opt_from(doc, "worst_settling_s");
    m.unsettled_legs = doc.at("unsettled_legs").get<std::size_t>();
    m.lap_time = opt_from(doc, "lap_time_s");
    m.min_clearance = clearance_from(doc.at("min_clearance_m"));
    m.collisions = doc.at("collisions").get<std::size_t>();
    m.max_speed = doc.at("max_speed_mps").get<double>();
    m.saturated_steps = doc.at("saturated_steps").get<std::size_t>();
    const json& ly = doc.at("lyapunov");
    m.lyapunov.pass = ly.at("verdict").get<std::string>() == "PASS";
    m.lyapunov.checked_steps = ly.at("checked_steps").get<std::size_t>();
    m.lyapunov.increases = ly.at("increases").get<std::size_t>();
    m.lyapunov.max_increase = ly.at("max_increase").get<double>();
    m.lyapunov.excluded_steps = ly.at("excluded_steps").get<std::size_t>();
    for (const json& i : ly.at("excluded_intervals")) {
        m.lyapunov.excluded.push_back({i.at(0).get<double>(), i.at(1).get<double>()});
    }
    return m;
}

void write_metrics(const RunMetrics& metrics, const std::filesystem::path& path,
                   const std::vector<std::string>& provenance) {
    json j = metrics_to_json(metrics, provenance);
    if (!std::isfinite(metrics.max_speed) || !std::isfinite(metrics.lyapunov.max_increase)) {
        throw IoError("refusing to write non-finite metrics to '" + path.string() + "'");
    }
    write_text(path, j.dump(2) + "\n");
}

json report_to_json(const ComparisonReport& report) {
    json j;
    j["schema_version"] = kSchemaVersion;
    j["kind"] = "comparison";
    j["scenario"] = report.scenario;
    j["scenario_id"] = report.scenario_id;
    j["plant"] = report.plant;
    j["rows"] = json::array();
    for (const ComparisonRow& r : report.rows) {
        j["rows"].push_back({{"controller", r.controller},
                             {"worst_overshoot_pct", opt_json(r.worst_overshoot)},
                             {"worst_settling_s", opt_json(r.worst_settling)},
                             {"lap_time_s", opt_json(r.lap_time)},
                             {"min_clearance_m", clearance_json(r.min_clearance)},
                             {"collisions", r.collisions},
                             {"max_speed_mps", r.max_speed},
                             {"lyapunov_pass", r.lyapunov_pass},
                             {"delta_overshoot_pct", opt_json(r.delta_overshoot)},
                             {"delta_settling_s", opt_json(r.delta_settling)},
                             {"delta_lap_time_s", opt_json(r.delta_lap_time)},
                             {"delta_clearance_m", opt_json(r.delta_clearance)}});
    }
    return j;
}

ComparisonReport report_from_json(const json& doc) {
    check_schema(doc, "comparison");
    ComparisonReport report;
    report.scenario = doc.at("scenario").get<std::string>();
    report.scenario_id = doc.at("scenario_id").get<std::string>();
    report.plant = doc.at("plant").get<std::string>();
    for (const json& r : doc.at("rows")) {
        ComparisonRow row;
        row.controller = r.at("controller").get<std::string>();
        row.worst_overshoot = opt_from(r, "worst_overshoot_pct");
        row.worst_settling = opt_from(r, "worst_settling_s");
        row.lap_time = opt_from(r, "lap_time_s");
        row.min_clearance = clearance_from(r.at("min_clearance_m"));
        row.collisions = r.at("collisions").get<std::size_t>();
        row.max_speed = r.at("max_speed_mps").get<double>();
        row.lyapunov_pass = r.at("lyapunov_pass").get<bool>();
        row.delta_overshoot = opt_from(r, "delta_overshoot_pct");
        row.delta_settling = opt_from(r, "delta_settling_s");
        row.delta_lap_time = opt_from(r, "delta_lap_time_s");
        row.delta_clearance = opt_from(r, "delta_clearance_m");
        report.rows.push_back(row);
    }
    return report;
}

void write_text(const std::filesystem::path& path, std::string_view text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot open '" + path.string() + "' for writing: " + std::strerror(errno));
    }
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    out.flush();
    if (!out) {
        throw IoError("failed writing '" + path.string() + "'");
    }
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open '" + path.string() + "' for reading: " + std::strerror(errno));
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace pfsim
