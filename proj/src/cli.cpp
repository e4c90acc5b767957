#include "pfsim/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <ostream>
#include <thread>

#include "pfsim/errors.hpp"
#include "pfsim/io.hpp"
#include "pfsim/metrics.hpp"

namespace pfsim {

namespace fs = std::filesystem;

namespace {

struct CommonOptions {
    std::string source;
    std::string controller;
    std::string plant;
    std::string out_dir;
    std::vector<std::string> sets;
    std::optional<std::uint64_t> seed;
    bool fail_on_collision = false;
};

std::vector<std::string> overrides_for(const CommonOptions& o) {
    std::vector<std::string> sets;
    if (!o.controller.empty()) {
        sets.push_back("controller=\"" + o.controller + "\"");
    }
    if (!o.plant.empty()) {
        sets.push_back("plant.kind=\"" + o.plant + "\"");
    }
    if (o.seed) {
        sets.push_back("sim.seed=" + std::to_string(*o.seed));
    }
    sets.insert(sets.end(), o.sets.begin(), o.sets.end());
    return sets;
}

std::string fmt(const std::optional<double>& v, const char* spec = "%.2f") {
    if (!v) {
        return "n/a";
    }
    if (std::isinf(*v)) {
        return "inf";
    }
    char buf[64];
    std::snprintf(buf, sizeof buf, spec, *v);
    return buf;
}

std::string summary_line(const RunMetrics& m) {
    const auto unit = [](const std::optional<double>& v, const std::string& text,
                         const char* suffix) { return v ? text + suffix : text; };
    return m.scenario + " " + m.controller + "/" + m.plant + ": lap " +
           unit(m.lap_time, fmt(m.lap_time), " s") + ", worst overshoot " +
           unit(m.worst_overshoot, fmt(m.worst_overshoot), "%") + ", worst settling " +
           unit(m.worst_settling, fmt(m.worst_settling), " s") + ", min clearance " +
           fmt(m.min_clearance, "%.3f") + (std::isinf(m.min_clearance) ? "" : " m") +
           ", collisions " + std::to_string(m.collisions) + ", lyapunov " +
           (m.lyapunov.pass ? "PASS" : "FAIL");
}

struct RunOutput {
    LoadedScenario loaded;
    TrajectoryLog log;
    RunMetrics metrics;
};

RunOutput simulate(LoadedScenario loaded) {
    RunOutput r{std::move(loaded), {}, {}};
    r.log = run(r.loaded.scenario);
    r.metrics = evaluate(r.loaded.scenario, r.log);
    return r;
}

void write_run(const RunOutput& r, const fs::path& dir) {
    fs::create_directories(dir);
    save_scenario(r.loaded.scenario, dir / "scenario.json");
    write_trajectory(r.log, dir / "trajectory.csv");
    write_metrics(r.metrics, dir / "metrics.json", r.loaded.provenance);
    write_text(dir / "lyapunov.csv",
               lyapunov_csv(monitor(r.log, r.loaded.scenario.gains)));
}

int cmd_run(const CommonOptions& o, std::ostream& out) {
    const RunOutput r = simulate(resolve_scenario(o.source, overrides_for(o)));
    const fs::path dir = o.out_dir.empty()
                             ? fs::path("pfsim-out") / (r.loaded.scenario.name + "-" +
                                                        r.metrics.controller)
                             : fs::path(o.out_dir);
    write_run(r, dir);
    out << summary_line(r.metrics) << "\n";
    if (o.fail_on_collision && r.metrics.collisions > 0) {
        out << "FAIL: " << r.metrics.collisions << " collision(s)\n";
        return kExitAssertion;
    }
    return kExitOk;
}

int cmd_compare(const CommonOptions& o, const std::vector<std::string>& controllers,
                bool assert_trends, std::ostream& out, std::ostream& err) {
    if (controllers.size() < 2) {
        err << "compare: need at least two controllers\n";
        return kExitUsage;
    }
    std::vector<RunMetrics> runs;
    const fs::path dir = o.out_dir.empty() ? fs::path("pfsim-out") : fs::path(o.out_dir);
    for (const std::string& c : controllers) {
        CommonOptions each = o;
        each.controller = c;
        const RunOutput r = simulate(resolve_scenario(o.source, overrides_for(each)));
        write_run(r, dir / (r.loaded.scenario.name + "-" + c));
        runs.push_back(r.metrics);
    }
    const ComparisonReport report = compare(runs);
    const std::string text = render_text(report);
    fs::create_directories(dir);
    write_text(dir / "comparison.json", report_to_json(report).dump(2) + "\n");
    write_text(dir / "comparison.txt", text);
    out << text;

    int status = kExitOk;
    if (o.fail_on_collision &&
        std::any_of(runs.begin(), runs.end(), [](const RunMetrics& m) { return m.collisions > 0; })) {
        out << "FAIL: collision detected\n";
        status = kExitAssertion;
    }
    if (assert_trends) {
        const auto find = [&](const char* name) -> const RunMetrics* {
            for (const RunMetrics& m : runs) {
                if (m.controller == name) return &m;
            }
            return nullptr;
        };
        const RunMetrics* pfc = find("pfc");
        const RunMetrics* epfc = find("epfc");
        if (pfc == nullptr || epfc == nullptr) {
            err << "compare: --assert-trends needs both pfc and epfc\n";
            return kExitUsage;
        }
        for (const TrendResult& t : check_trends(*pfc, *epfc)) {
            out << (t.pass ? "PASS " : "FAIL ") << t.name << ": " << t.detail << "\n";
            if (!t.pass) {
                status = kExitAssertion;
            }
        }
    }
    return status;
}

std::vector<std::string> split_values(const std::string& list) {
    std::vector<std::string> values;
    std::string current;
    int depth = 0;
    for (char c : list) {
        if (c == '[' || c == '{') ++depth;
        if (c == ']' || c == '}') --depth;
        if (c == ',' && depth == 0) {
            values.push_back(current);
            current.clear();
        } else {
            current += c;
        }
    }
    values.push_back(current);
    return values;
}

struct SweepRow {
    std::vector<std::string> assignments;
    std::string status = "ok";
    RunMetrics metrics;
};

std::string sweep_table(const std::vector<std::string>& keys, const std::vector<SweepRow>& rows) {
    std::string out = "point";
    for (const std::string& k : keys) {
        out += "," + k;
    }
    out += ",status,worst_overshoot_pct,worst_settling_s,lap_time_s,min_clearance_m,collisions,"
           "max_speed_mps,lyapunov\n";
    const auto num = [](const std::optional<double>& v) -> std::string {
        if (!v) return "";
        if (std::isinf(*v)) return "inf";
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.6g", *v);
        return buf;
    };
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const SweepRow& r = rows[i];
        out += std::to_string(i);
        for (const std::string& a : r.assignments) {
            std::string value = a.substr(a.find('=') + 1);
            std::replace(value.begin(), value.end(), ',', ';');
            out += "," + value;
        }
        std::string status = r.status;
        std::replace(status.begin(), status.end(), ',', ';');
        std::replace(status.begin(), status.end(), '\n', ' ');
        out += "," + status;
        if (r.status == "ok") {
            const RunMetrics& m = r.metrics;
            out += "," + num(m.worst_overshoot) + "," + num(m.worst_settling) + "," +
                   num(m.lap_time) + "," + num(m.min_clearance) + "," +
                   std::to_string(m.collisions) + "," + num(m.max_speed) + "," +
                   (m.lyapunov.pass ? "PASS" : "FAIL");
        } else {
            out += ",,,,,,,";
        }
        out += "\n";
    }
    return out;
}

int cmd_sweep(const CommonOptions& o, const std::vector<std::string>& grid, unsigned jobs,
              std::ostream& out) {
    const auto points = expand_grid(grid);
    std::vector<std::string> keys;
    for (const std::string& spec : grid) {
        keys.push_back(spec.substr(0, spec.find('=')));
    }
    const std::vector<std::string> base = overrides_for(o);

    std::vector<SweepRow> rows(points.size());
    std::atomic<std::size_t> next{0};
    const auto worker = [&] {
        for (std::size_t i = next++; i < points.size(); i = next++) {
            SweepRow& row = rows[i];
            row.assignments = points[i];
            std::vector<std::string> sets = base;
            sets.insert(sets.end(), points[i].begin(), points[i].end());
            try {
                const LoadedScenario loaded = resolve_scenario(o.source, sets);
                row.metrics = evaluate(loaded.scenario, run(loaded.scenario));
            } catch (const std::exception& e) {
                row.status = std::string("error: ") + e.what();
            }
        }
    };
    jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(points.size())));
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned j = 0; j < jobs; ++j) {
            pool.emplace_back(worker);
        }
        for (auto& t : pool) {
            t.join();
        }
    }

    const std::string table = sweep_table(keys, rows);
    if (!o.out_dir.empty()) {
        fs::create_directories(o.out_dir);
        write_text(fs::path(o.out_dir) / "sweep.csv", table);
    }
    out << table;
    return kExitOk;
}

}  // namespace

std::vector<std::vector<std::string>> expand_grid(const std::vector<std::string>& specs) {
    std::vector<std::vector<std::string>> points{{}};
    for (const std::string& spec : specs) {
        const auto eq = spec.find('=');
        if (eq == std::string::npos || eq == 0 || eq + 1 == spec.size()) {
            throw ValidationError(spec, "grid spec must look like key=v1,v2,...");
        }
        const std::string key = spec.substr(0, eq);
        std::vector<std::vector<std::string>> expanded;
        for (const auto& p : points) {
            for (const std::string& v : split_values(spec.substr(eq + 1))) {
                auto q = p;
                q.push_back(key + "=" + v);
                expanded.push_back(std::move(q));
            }
        }
        points = std::move(expanded);
    }
    return points;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Potential-field quadcopter simulator", "pfsim"};
    app.require_subcommand(1);

    CommonOptions opts;
    const auto add_common = [&](CLI::App* cmd, bool with_controller) {
        cmd->add_option("scenario", opts.source, "builtin name or scenario file")->required();
        if (with_controller) {
            cmd->add_option("--controller", opts.controller, "pfc or epfc")
                ->check(CLI::IsMember({"pfc", "epfc"}));
        }
        cmd->add_option("--plant", opts.plant, "kinematic, lag or full")
            ->check(CLI::IsMember({"kinematic", "lag", "full"}));
        cmd->add_option("--out", opts.out_dir, "output directory");
        cmd->add_option("--set", opts.sets, "override section.key=value")->take_all();
        cmd->add_option("--seed", opts.seed, "seed for randomized layouts");
    };

    CLI::App* run_cmd = app.add_subcommand("run", "simulate one scenario");
    add_common(run_cmd, true);
    run_cmd->add_flag("--fail-on-collision", opts.fail_on_collision);

    std::vector<std::string> controllers;
    bool assert_trends = false;
    CLI::App* compare_cmd = app.add_subcommand("compare", "run several controllers side by side");
    add_common(compare_cmd, false);
    compare_cmd->add_option("controllers", controllers, "controllers to compare")
        ->check(CLI::IsMember({"pfc", "epfc"}));
    compare_cmd->add_flag("--assert-trends", assert_trends);
    compare_cmd->add_flag("--fail-on-collision", opts.fail_on_collision);

    std::vector<std::string> grid;
    unsigned jobs = 1;
    CLI::App* sweep_cmd = app.add_subcommand("sweep", "run a parameter grid");
    add_common(sweep_cmd, true);
    sweep_cmd->add_option("--grid", grid, "key=v1,v2,... (repeatable)")->required()->take_all();
    sweep_cmd->add_option("--jobs", jobs, "parallel runs")->check(CLI::PositiveNumber);

    app.add_subcommand("list", "print builtin scenario names");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (run_cmd->parsed()) {
            return cmd_run(opts, out);
        }
        if (compare_cmd->parsed()) {
            return cmd_compare(opts, controllers, assert_trends, out, err);
        }
        if (sweep_cmd->parsed()) {
            return cmd_sweep(opts, grid, jobs, out);
        }
        for (const std::string& name : builtin_names()) {
            out << name << "\n";
        }
        return kExitOk;
    } catch (const ValidationError& e) {
        err << "invalid scenario: " << e.what() << "\n";
        return kExitValidation;
    } catch (const ParseError& e) {
        err << "parse error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const NumericAbort& e) {
        err << "numeric abort: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitFailure;
    }
}

}  // namespace pfsim
