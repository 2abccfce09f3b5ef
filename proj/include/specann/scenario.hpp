#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "specann/annihilator.hpp"
#include "specann/detect.hpp"
#include "specann/errors.hpp"

namespace specann {

inline constexpr const char* kScenarioSchema = "specann.scenario/1";

struct Scenario {
    std::string id;
    SpectralMeasure measure;
    int rank = 1;                     // 1: phi = 1; 2: (1, k)
    std::vector<double> strengths{1.0};
    AnnihilatorMode mode = AnnihilatorMode::thm3;
    double delta0 = 0.0;              // thm2
    Intervals delta;                  // thm3
    Intervals omega;                  // thm2, optional derealization set
    std::vector<double> eps_ladder = default_eps_ladder();
    int grid = 4096;                  // base points of the line grids
    int logmod_dense = 512;
    std::uint64_t seed = 1;
    Calibration calibration;
    std::optional<std::string> expect;  // ground-truth verdict for every region, zoo only
    std::string output_dir;
    bool tables = false;
};

/// Parses a schema-v1 config. Unknown keys are rejected. `source` (the raw
/// text) is used only to attach line numbers to messages.
Scenario parse_scenario(const std::string& source);
Scenario load_scenario(const std::filesystem::path& path);

/// Command-line overrides, validated against the same ranges as the config.
void apply_eps_ladder(Scenario& s, const std::vector<double>& ladder);
void apply_grid(Scenario& s, int grid);

OperatorModel build_model(const Scenario& s);
/// The same scenario with the rank-two coupling (1, k), strengths 1.
Scenario with_rank_two(const Scenario& s);

AnnihilatorBundle build_bundle(const Scenario& s, const OperatorModel& model);
std::vector<RegionSpec> regions(const Scenario& s);

struct ScenarioReport {
    std::string scenario_id;
    AnnihilatorMode mode = AnnihilatorMode::thm3;
    std::vector<RegionReport> regions;
    Calibration calibration;
    std::vector<double> eps_ladder;
    int grid = 0;
    std::uint64_t seed = 0;
    int rank = 1;
    std::optional<double> runtime_ms;
};

/// Builds the model and bundle and classifies every region.
ScenarioReport run_scenario(const Scenario& s);

/// Report JSON: scenario_id, mode, verdicts, calibration, runtime_ms.
std::string report_json(const ScenarioReport& r);

/// One CSV row per (detector, vector, eps).
struct TraceRow {
    std::string detector;
    std::string vector_id;
    double eps = 0.0;
    cplx value = 0.0;
    double norm = 0.0;
};
inline constexpr const char* kTraceHeader = "detector,vector_id,eps,value_re,value_im,norm";
std::string trace_csv(const std::vector<TraceRow>& rows);
/// Rows of every evidence trace in the report, optionally one detector / vector.
std::vector<TraceRow> trace_rows(const ScenarioReport& r, const std::string& detector = "", const std::string& vector = "");

/// Detector names accepted by the trace command.
const std::vector<std::string>& detector_names();

/// Raw eps-ladder trace for one detector and one dictionary vector (searched
/// across regions in order). Throws ConfigError for unknown names.
std::vector<TraceRow> single_trace(const Scenario& s, const std::string& detector, const std::string& vector);

/// Pairwise annihilation traces over the dictionary of every region.
std::vector<TraceRow> pair_traces(const Scenario& s, const OperatorModel& model, const AnnihilatorBundle& bundle);

/// Plot tables: gamma on Im = 1e-3, |gamma_A(k + i0)| and the bump b(k).
struct PlotTables {
    std::string gamma_line;
    std::string gamma_a_boundary;
    std::string beta_boundary;  // empty for thm2
};
PlotTables plot_tables(const Scenario& s, const OperatorModel& model, const AnnihilatorBundle& bundle);

}  // namespace specann
