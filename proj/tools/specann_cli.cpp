// specann command-line front end: one scenario per invocation.
//
// Exit codes: 0 success, 1 numeric or detection failure, 2 config or usage error.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "specann/errors.hpp"
#include "specann/scenario.hpp"

namespace fs = std::filesystem;
using namespace specann;

namespace {

struct Options {
    std::string config;
    std::string out;
    std::string eps_ladder;
    bool has_ladder = false;
    int grid = 0;
    long long seed = -1;
    std::string detector;
    std::string vector;
    bool timing = false;
    bool tables = false;
};

std::vector<double> parse_ladder(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto b = item.find_first_not_of(" \t"), e = item.find_last_not_of(" \t");
        if (b == std::string::npos) throw ConfigError("--eps-ladder: empty entry in \"" + text + "\"");
        item = item.substr(b, e - b + 1);
        std::size_t used = 0;
        double x = 0.0;
        try {
            x = std::stod(item, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != item.size()) throw ConfigError("--eps-ladder: \"" + item + "\" is not a number");
        out.push_back(x);
    }
    if (out.empty()) throw ConfigError("--eps-ladder: the ladder is empty");
    return out;
}

Scenario load(const Options& o) {
    Scenario s = load_scenario(o.config);
    if (o.has_ladder) apply_eps_ladder(s, parse_ladder(o.eps_ladder));
    if (o.grid != 0) apply_grid(s, o.grid);
    if (o.seed >= 0) s.seed = static_cast<std::uint64_t>(o.seed);
    return s;
}

std::string out_dir(const Options& o, const Scenario& s) { return o.out.empty() ? s.output_dir : o.out; }

void write_file(const fs::path& p, const std::string& text) {
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    std::ofstream f(p, std::ios::binary);
    f << text;
    if (!f) throw std::runtime_error("cannot write " + p.string());
}

void write_tables(const fs::path& dir, const Scenario& s, const OperatorModel& model, const AnnihilatorBundle& bundle) {
    const PlotTables t = plot_tables(s, model, bundle);
    write_file(dir / "tables" / "gamma_line.csv", t.gamma_line);
    write_file(dir / "tables" / "gamma_a_boundary.csv", t.gamma_a_boundary);
    if (!t.beta_boundary.empty()) write_file(dir / "tables" / "beta_boundary.csv", t.beta_boundary);
}

// Writes the report (stdout without an output directory) and returns the exit
// status: 1 when a region is inconclusive or contradicts the scenario's expect.
int emit_report(const Options& o, const Scenario& s, ScenarioReport r) {
    if (!o.timing) r.runtime_ms.reset();
    const std::string json = report_json(r);
    const std::string dir = out_dir(o, s);
    if (dir.empty()) {
        std::cout << json;
    } else {
        write_file(fs::path(dir) / "report.json", json);
        write_file(fs::path(dir) / "traces.csv", trace_csv(trace_rows(r)));
    }
    int status = 0;
    for (const auto& reg : r.regions) {
        if (reg.verdict == Verdict::inconclusive) {
            std::cerr << "specann: region " << reg.region << " is inconclusive\n";
            status = 1;
        } else if (s.expect && to_string(reg.verdict) != *s.expect) {
            std::cerr << "specann: region " << reg.region << " classified " << to_string(reg.verdict) << ", expected "
                      << *s.expect << "\n";
            status = 1;
        }
    }
    return status;
}

int cmd_classify(const Options& o) {
    const Scenario s = load(o);
    const ScenarioReport r = run_scenario(s);
    const std::string dir = out_dir(o, s);
    if (!dir.empty() && (o.tables || s.tables)) {
        const OperatorModel model = build_model(s);
        write_tables(dir, s, model, build_bundle(s, model));
    }
    return emit_report(o, s, r);
}

int cmd_annihilate(const Options& o) {
    const Scenario s = load(o);
    const OperatorModel model = build_model(s);
    const AnnihilatorBundle bundle = build_bundle(s, model);
    const std::string dir = out_dir(o, s);
    if (!dir.empty()) {
        write_file(fs::path(dir) / "annihilation.csv", trace_csv(pair_traces(s, model, bundle)));
        if (o.tables || s.tables) write_tables(dir, s, model, bundle);
    }
    return emit_report(o, s, run_scenario(s));
}

int cmd_smirnov(const Options& o) {
    const Scenario s = load(o);
    std::vector<TraceRow> rows;
    for (const auto& reg : regions(s))
        for (const auto& d : region_dictionary(s.measure, reg.lo, reg.hi, s.seed)) {
            if (!o.vector.empty() && d.id != o.vector) continue;
            for (const char* det : {"smirnov_strong", "smirnov_weak"}) {
                if (!o.detector.empty() && o.detector != det) continue;
                auto part = single_trace(s, det, d.id);
                rows.insert(rows.end(), part.begin(), part.end());
            }
        }
    if (rows.empty()) throw ConfigError("no dictionary vector or detector matched the filters");
    const std::string dir = out_dir(o, s);
    if (dir.empty()) std::cout << trace_csv(rows);
    else write_file(fs::path(dir) / "smirnov.csv", trace_csv(rows));
    return 0;
}

int cmd_trace(const Options& o) {
    const Scenario s = load(o);
    const std::string csv = trace_csv(single_trace(s, o.detector, o.vector));
    if (o.out.empty()) std::cout << csv;
    else write_file(fs::path(o.out) / ("trace_" + o.detector + "_" + o.vector + ".csv"), csv);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Annihilating outer functions and Smirnov-class detectors for singular spectrum"};
    app.require_subcommand(1);
    Options o;

    auto common = [&](CLI::App* c) {
        c->add_option("--config", o.config, "Scenario JSON")->required()->check(CLI::ExistingFile);
        c->add_option("--out", o.out, "Output directory (default: the config's output.dir, else stdout)");
        c->add_option("--eps-ladder", o.eps_ladder, "Comma-separated, strictly decreasing eps values");
        c->add_option("--grid", o.grid, "Base points of the line grids");
        c->add_option("--seed", o.seed, "Seed of the random dictionary probes")->check(CLI::NonNegativeNumber);
        c->add_flag("--timing", o.timing, "Record runtime_ms in the report (breaks byte-identical output)");
    };
    CLI::App* annihilate = app.add_subcommand("annihilate", "Build the annihilator, write pair traces and the report");
    CLI::App* classify = app.add_subcommand("classify", "Classify every region of the scenario");
    CLI::App* smirnov = app.add_subcommand("smirnov", "Smirnov-class norm traces for the dictionary");
    CLI::App* trace = app.add_subcommand("trace", "Raw eps-ladder trace of one detector and vector");
    for (CLI::App* c : {annihilate, classify, smirnov, trace}) common(c);
    for (CLI::App* c : {annihilate, classify}) c->add_flag("--tables", o.tables, "Write plot tables under OUT/tables");
    smirnov->add_option("--detector", o.detector, "smirnov_strong or smirnov_weak");
    smirnov->add_option("--vector", o.vector, "Dictionary vector id");
    trace->add_option("--detector", o.detector, "Detector name")->required();
    trace->add_option("--vector", o.vector, "Dictionary vector id")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }
    for (CLI::App* c : {annihilate, classify, smirnov, trace})
        if (c->count("--eps-ladder")) o.has_ladder = true;

    try {
        if (*annihilate) return cmd_annihilate(o);
        if (*classify) return cmd_classify(o);
        if (*smirnov) return cmd_smirnov(o);
        return cmd_trace(o);
    } catch (const ConfigError& e) {
        std::cerr << "specann: " << e.what() << "\n";
        return 2;
    } catch (const PreconditionError& e) {
        std::cerr << "specann: invalid scenario: " << e.what() << "\n";
        return 2;
    } catch (const NumericError& e) {
        std::cerr << "specann: numeric failure: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "specann: " << e.what() << "\n";
        return 1;
    }
}
