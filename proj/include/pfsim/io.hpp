// File formats: scenario documents (JSON), trajectory tables (CSV) and
// metrics/comparison documents (JSON). Every document carries schema_version.
#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "pfsim/metrics.hpp"
#include "pfsim/scenario.hpp"

namespace pfsim {

inline constexpr int kSchemaVersion = 1;

struct LoadedScenario {
    Scenario scenario;
    /// One line per value not given explicitly, e.g.
    /// "gains.lambda1 = 1 (default)" or "... (builtin sim-course)", and one per
    /// `--set` override.
    std::vector<std::string> provenance;
};

/// Builds a scenario from a document. A "builtin" key selects the base
/// layout; otherwise library defaults apply. Unknown keys, wrong types and
/// constraint violations throw ValidationError naming the field.
LoadedScenario scenario_from_json(const nlohmann::json& doc);

/// Parses text (comments allowed), applies dotted `key=value` overrides and
/// validates. Malformed text throws ParseError with line and column.
LoadedScenario parse_scenario(std::string_view text,
                              const std::vector<std::string>& overrides = {});

LoadedScenario load_scenario(const std::filesystem::path& path,
                             const std::vector<std::string>& overrides = {});

/// A readable file path or a builtin name; unknown names list the builtins.
LoadedScenario resolve_scenario(const std::string& source,
                                const std::vector<std::string>& overrides = {});

/// Sets `section.key=value` in a document. The value is read as JSON when it
/// parses (numbers, booleans, arrays) and as a string otherwise.
void apply_override(nlohmann::json& doc, std::string_view assignment);

/// Fully explicit document; reloading it gives an equal Scenario.
nlohmann::json scenario_to_json(const Scenario& scenario);
void save_scenario(const Scenario& scenario, const std::filesystem::path& path);

/// Stable hash of everything in the scenario except the controller choice.
std::string scenario_identity(const Scenario& scenario);

/// Trajectory table header, in file order.
const std::vector<std::string>& trajectory_columns();

/// One row per record, 12 significant digits. Non-finite values throw IoError.
std::string trajectory_csv(const TrajectoryLog& log);
void write_trajectory(const TrajectoryLog& log, const std::filesystem::path& path);

struct TrajectoryTable {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

/// Throws ParseError on malformed input.
TrajectoryTable parse_trajectory(std::string_view text);
TrajectoryTable read_trajectory(const std::filesystem::path& path);

/// Per-step Lyapunov samples: t, L, dL, relative_accel, excluded.
std::string lyapunov_csv(const LyapunovReport& report);

/// Infinite clearance and absent values are written as null.
nlohmann::json metrics_to_json(const RunMetrics& metrics,
                               const std::vector<std::string>& provenance = {});
RunMetrics metrics_from_json(const nlohmann::json& doc);
void write_metrics(const RunMetrics& metrics, const std::filesystem::path& path,
                   const std::vector<std::string>& provenance = {});

nlohmann::json report_to_json(const ComparisonReport& report);
ComparisonReport report_from_json(const nlohmann::json& doc);

/// Both throw IoError naming the path.
void write_text(const std::filesystem::path& path, std::string_view text);
std::string read_text(const std::filesystem::path& path);

}  // namespace pfsim
