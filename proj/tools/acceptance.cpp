// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.
//
// usage: specann_acceptance [SCENARIO_DIR]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <sstream>

#include "specann/scenario.hpp"

namespace fs = std::filesystem;
using namespace specann;

namespace {

// Tolerances, fixed here so a run can be audited against them.
constexpr double kRankOneTol = 1e-12;
constexpr double kNormalizationTol = 2e-4;
constexpr double kContractTol = 1e-10;
constexpr int kContractSamples = 1000;
constexpr double kOuterTol = 1e-6;
constexpr double kHilbertTol = 1e-4;
constexpr double kPlemeljTol = 1e-3;
constexpr double kAnnihilateRatio = 0.05;
constexpr double kControlRelTol = 0.01;
// The control's limit is read at 1e-5: random probes also carry Cantor mass,
// whose part of T decays only like eps^0.67 and is still ~2% at 1e-4.
const std::vector<double> kLimitLadder{1e-1, 3e-2, 1e-2, 3e-3, 1e-3, 3e-4, 1e-4, 3e-5, 1e-5};
constexpr double kAtomSlope = 1.0, kAtomSlopeTol = 0.1;
constexpr double kStrongAtomSlope = -0.5, kStrongAtomSlopeTol = 0.05;
constexpr double kFlatSlopeTol = 0.1;
constexpr double kClosedFormTol = 0.01;
constexpr double kCantorWithoutMax = -0.05, kCantorWithMin = -0.1;
constexpr double kWeakRatioMax = 1.5;

const cplx I(0.0, 1.0);

fs::path g_dir;
int g_failed = 0;

std::string sci(double x) {
    std::ostringstream s;
    s << std::setprecision(3) << std::scientific << x;
    return s.str();
}
std::string fix(double x) {
    std::ostringstream s;
    s << std::setprecision(3) << std::fixed << x;
    return s.str();
}

void verdict(int n, const std::string& title, bool pass, const std::string& detail) {
    if (!pass) ++g_failed;
    std::cout << "criterion " << std::setw(2) << n << ": " << (pass ? "PASS" : "FAIL") << "  " << title << " -- "
              << detail << std::endl;
}

// Runs one criterion; an exception counts as a failure with its message.
void check(int n, const std::string& title, const std::function<std::pair<bool, std::string>()>& body) {
    const auto t0 = std::chrono::steady_clock::now();
    try {
        auto [pass, detail] = body();
        const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        verdict(n, title, pass, detail + " [" + fix(s) + " s]");
    } catch (const std::exception& e) {
        verdict(n, title, false, std::string("exception: ") + e.what());
    }
}

Scenario load(const std::string& name) { return load_scenario(g_dir / name); }

std::vector<std::string> zoo_names() {
    std::vector<std::string> out;
    for (const auto& e : fs::directory_iterator(g_dir / "zoo"))
        if (e.path().extension() == ".json") out.push_back("zoo/" + e.path().filename().string());
    std::sort(out.begin(), out.end());
    return out;
}

double rel(cplx a, cplx b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

// ---------------------------------------------------------------- 1-3: gamma_A

std::pair<bool, std::string> rank_one_consistency() {
    double worst = 0.0;
    for (const char* name : {"atom_unit.json", "ac_flat.json", "zoo/cantor_in_delta.json"}) {
        const OperatorModel m = build_model(load(name));
        for (int k = 0; k < 10; ++k) {
            const cplx lam(-2.5 + 0.5 * k, 1e-3 * std::pow(10.0, k % 4));
            const cplx g = gamma_A(m, lam);
            const cplx det = theta(m, lam).determinant();
            const cplx half_s = (1.0 + characteristic_function(m, lam)(0, 0)) / 2.0;
            const cplx direct = 1.0 / (1.0 - I * m.coupling_matrix(lam)(0, 0));
            worst = std::max({worst, rel(det, g), rel(half_s, g), rel(direct, g)});
        }
    }
    return {worst <= kRankOneTol, "3 models x 10 points, max relative deviation " + sci(worst) + " (tol " +
                                      sci(kRankOneTol) + ")"};
}

std::vector<std::string> unit_mass_models() {
    std::vector<std::string> out;
    for (const auto& n : zoo_names()) out.push_back(n);
    for (const char* n : {"atom_unit.json", "ac_flat.json", "gap_singular.json", "gap_singular_ac.json",
                          "gap_control.json", "bump_singular.json", "bump_control.json"})
        out.emplace_back(n);
    return out;
}

std::pair<bool, std::string> normalization() {
    double worst = 0.0;
    int n = 0;
    for (const auto& name : unit_mass_models()) {
        const Scenario s = load(name);
        if (std::abs(s.measure.total_mass() - 1.0) > 1e-12) throw std::runtime_error(name + " is not unit mass");
        worst = std::max(worst, std::abs(gamma_A(build_model(s), cplx(0.0, 1e4)) - 1.0));
        ++n;
    }
    return {worst < kNormalizationTol,
            std::to_string(n) + " unit-mass models, max |gamma_A(1e4 i) - 1| = " + sci(worst) + " (tol " +
                sci(kNormalizationTol) + ")"};
}

std::pair<bool, std::string> contractivity() {
    double worst_s = 0.0, worst_g = 0.0;
    int models = 0, degenerate = 0;
    std::mt19937_64 rng(20261016);
    for (const auto& name : unit_mass_models()) {
        const Scenario s = load(name);
        for (const Scenario& variant : {s, with_rank_two(s)}) {
            std::optional<OperatorModel> built;
            try {
                built.emplace(build_model(variant));
            } catch (const PreconditionError&) {
                ++degenerate;  // 1 and k are dependent on a single atom
                continue;
            }
            const OperatorModel& m = *built;
            const auto [lo, hi] = variant.measure.hull();
            std::uniform_real_distribution<double> x(lo - 1.0, hi + 1.0), logy(-6.0, 3.0);
            for (int k = 0; k < kContractSamples; ++k) {
                const cplx lam(x(rng), std::pow(10.0, logy(rng)));
                const CMatrix S = characteristic_function(m, lam);
                const double opnorm = Eigen::JacobiSVD<CMatrix>(S).singularValues()(0);
                worst_s = std::max(worst_s, opnorm - 1.0);
                worst_g = std::max(worst_g, std::abs(gamma_A(m, lam)) - 1.0);
            }
            ++models;
        }
    }
    const bool pass = worst_s <= kContractTol && worst_g <= kContractTol;
    return {pass, std::to_string(models) + " models (rank 1 and 2, " + std::to_string(degenerate) +
                      " degenerate rank-2 skipped) x " + std::to_string(kContractSamples) +
                      " samples, max ||S|| - 1 = " + sci(worst_s) + ", max |gamma_A| - 1 = " + sci(worst_g) +
                      " (tol " + sci(kContractTol) + ")"};
}

// ---------------------------------------------------------------- 4-5: outer functions

cplx ratio_fn(cplx l) { return (l + I) / (l + 2.0 * I); }
double ratio_logmod(double t) { return 0.5 * std::log((t * t + 1.0) / (t * t + 4.0)); }

OuterFunction ratio_outer() {
    KnotSpec ks;
    ks.lo = -20.0;
    ks.hi = 20.0;
    ks.dense = 2000;
    ks.growth = 1.05;
    return outer_from_logmod(ratio_logmod, graded_knots(ks));
}

std::pair<bool, std::string> outer_round_trip() {
    const OuterFunction o = ratio_outer();
    // (lambda + i)/(lambda + 2i) is positive at 1000i, the normalization point of the phase constant.
    double worst = 0.0;
    for (int k = 0; k < 20; ++k) {
        const cplx lam(-4.0 + 0.43 * k, 0.02 + 0.37 * (k % 6));
        worst = std::max(worst, rel(o(lam), ratio_fn(lam)));
    }
    return {worst <= kOuterTol, "20 points, max relative error " + sci(worst) + " (tol " + sci(kOuterTol) + ")"};
}

std::pair<bool, std::string> hilbert_oracle() {
    const auto chi = [](double t) { return std::abs(t) <= 1.0 ? 1.0 : 0.0; };
    const double h = hilbert_transform(chi, -1.0, 1.0, 2.0);
    const double err = std::abs(h - std::log(3.0) / M_PI);
    const OuterFunction o = ratio_outer();
    const std::vector<double> breaks{-100.0, -10.0, -1.0, 1.0, 10.0, 100.0};
    double worst = 0.0;
    for (int k = 0; k < 100; ++k) {
        const double x = -5.0 + 0.1 * k + 0.013;
        const double conj = hilbert_transform(ratio_logmod, -1e4, 1e4, x, breaks);
        // boundary phase of the exact function against the conjugate of its log-modulus
        const double phase = std::arg(ratio_fn(cplx(x, 0.0))) - o.phase();
        worst = std::max(worst, std::abs(std::remainder(phase - conj, 2.0 * M_PI)));
    }
    const bool pass = err <= kHilbertTol && worst < kPlemeljTol;
    return {pass, "|H[chi](2) - ln3/pi| = " + sci(err) + " (tol " + sci(kHilbertTol) +
                      "), phase-modulus residual on 100 points " + sci(worst) + " (tol " + sci(kPlemeljTol) + ")"};
}

// ---------------------------------------------------------------- 6-7: annihilation

struct PairTrace {
    std::vector<double> eps;
    std::vector<cplx> values;
};

std::map<std::string, PairTrace> pairs_of(const Scenario& s) {
    const OperatorModel m = build_model(s);
    const AnnihilatorBundle b = build_bundle(s, m);
    std::map<std::string, PairTrace> out;
    for (const auto& row : pair_traces(s, m, b)) {
        out[row.vector_id].eps.push_back(row.eps);
        out[row.vector_id].values.push_back(row.value);
    }
    return out;
}

double sup_abs(const std::vector<cplx>& v) {
    double m = 0.0;
    for (cplx z : v) m = std::max(m, std::abs(z));
    return m;
}

// Every dictionary pair of a purely singular region: |T(eps_min)| <= 5% sup |T|.
std::string annihilates(const std::string& name, bool& pass) {
    const auto pairs = pairs_of(load(name));
    double worst = 0.0;
    std::string worst_pair;
    int zero = 0;
    for (const auto& [id, t] : pairs) {
        const double sup = sup_abs(t.values);
        if (sup == 0.0) {
            ++zero;
            continue;
        }
        const double r = std::abs(t.values.back()) / sup;
        if (r > worst) worst = r, worst_pair = id;
    }
    pass = pass && worst <= kAnnihilateRatio;
    return name + ": " + std::to_string(pairs.size()) + " pairs (" + std::to_string(zero) +
           " identically zero), worst ratio " + fix(worst) + " at " + worst_pair;
}

// Negative control: pairs with AC overlap converge to the boundary-quadrature oracle.
std::string control(const std::string& name, bool& pass) {
    Scenario s = load(name);
    apply_eps_ladder(s, kLimitLadder);
    const OperatorModel m = build_model(s);
    const AnnihilatorBundle b = build_bundle(s, m);
    std::map<std::string, PairTrace> pairs;
    for (const auto& row : pair_traces(s, m, b)) {
        pairs[row.vector_id].eps.push_back(row.eps);
        pairs[row.vector_id].values.push_back(row.value);
    }
    const RegionSpec reg = regions(s).front();
    std::map<std::string, SymbolVector> dict;
    for (auto& d : region_dictionary(s.measure, reg.lo, reg.hi, s.seed)) dict.emplace(d.id, d.vector);
    double worst_rel = 0.0, min_ratio = 1.0;
    int checked = 0;
    for (const auto& [id, t] : pairs) {
        const auto colon = id.find(':');
        const SymbolVector& u = dict.at(id.substr(0, colon));
        const SymbolVector& v = dict.at(id.substr(colon + 1));
        const cplx oracle = s.mode == AnnihilatorMode::thm2 ? boundary_limit_thm2(b, u, v) : boundary_limit_thm3(b, u, v);
        if (std::abs(oracle) < 1e-3 * sup_abs(t.values)) continue;  // no AC overlap: nothing to compare
        ++checked;
        worst_rel = std::max(worst_rel, std::abs(std::abs(t.values.back()) - std::abs(oracle)) / std::abs(oracle));
        min_ratio = std::min(min_ratio, std::abs(t.values.back()) / sup_abs(t.values));
    }
    pass = pass && checked > 0 && worst_rel <= kControlRelTol && min_ratio > kAnnihilateRatio;
    return name + ": " + std::to_string(checked) + " AC-overlap pairs, max |T(1e-5) - oracle|/|oracle| " + sci(worst_rel) +
           ", min ratio " + fix(min_ratio) + " (> " + fix(kAnnihilateRatio) + ")";
}

std::pair<bool, std::string> gap_annihilation() {
    bool pass = true;
    std::string d = annihilates("gap_singular.json", pass);
    d += "; " + annihilates("gap_singular_ac.json", pass);
    d += "; " + control("gap_control.json", pass);
    return {pass, d};
}

std::pair<bool, std::string> bump_annihilation() {
    bool pass = true;
    std::string d = annihilates("bump_singular.json", pass);
    d += "; " + control("bump_control.json", pass);
    const auto pairs = pairs_of(load("bump_singular.json"));
    const PairTrace& atom = pairs.at("atom0:atom0");
    std::vector<double> mag;
    for (cplx z : atom.values) mag.push_back(std::abs(z));
    const SlopeFit f = fit_log_slope(atom.eps, mag, 5);
    pass = pass && std::abs(f.slope - kAtomSlope) <= kAtomSlopeTol;
    return {pass, d + "; atom trace slope " + fix(f.slope) + " (1 +- " + fix(kAtomSlopeTol) + ")"};
}

// ---------------------------------------------------------------- 8-9: Smirnov detectors

std::pair<bool, std::string> strong_slopes() {
    const auto ladder = default_eps_ladder();
    std::ostringstream d;
    bool pass = true;
    {
        const Scenario s = load("atom_unit.json");  // unit atom at 0, v = 1
        const OperatorModel m = build_model(s);
        const auto t = smirnov_strong_trace(m, SymbolVector::one(), ladder);
        std::vector<double> without, with;
        double worst = 0.0;
        for (const auto& p : t) {
            without.push_back(p.without_delta);
            with.push_back(p.with_delta);
            worst = std::max(worst, std::abs(p.without_delta * p.without_delta / (2.0 * M_PI / p.eps) - 1.0));
            worst = std::max(worst, std::abs(p.with_delta * p.with_delta / (2.0 * M_PI / (p.eps + 1.0)) - 1.0));
        }
        const double a = fit_log_slope(ladder, without).slope, b = fit_log_slope(ladder, with).slope;
        pass = pass && std::abs(a - kStrongAtomSlope) <= kStrongAtomSlopeTol && std::abs(b) <= kFlatSlopeTol &&
               worst <= kClosedFormTol;
        d << "atom slopes " << fix(a) << " / " << fix(b) << ", closed forms within " << sci(worst);
    }
    {
        const Scenario s = load("ac_flat.json");
        const OperatorModel m = build_model(s);
        const auto t = smirnov_strong_trace(m, SymbolVector::one(), ladder);
        std::vector<double> without, with;
        for (const auto& p : t) {
            without.push_back(p.without_delta);
            with.push_back(p.with_delta);
        }
        const double a = fit_log_slope(ladder, without).slope, b = fit_log_slope(ladder, with).slope;
        pass = pass && std::abs(a) <= kFlatSlopeTol && std::abs(b) <= kFlatSlopeTol;
        d << "; flat AC slopes " << fix(a) << " / " << fix(b);
    }
    for (double ratio : {0.1, 1.0 / 3.0}) {
        ScPiece p;
        p.lo = -2.0;
        p.hi = -0.5;
        p.ratio = ratio;
        const OperatorModel m(SpectralMeasure({}, {}, {p}));
        const auto t = smirnov_strong_trace(m, SymbolVector::one(), ladder);
        std::vector<double> without, with;
        for (const auto& q : t) {
            without.push_back(q.without_delta);
            with.push_back(q.with_delta);
        }
        const double a = fit_log_slope(ladder, without).slope, b = fit_log_slope(ladder, with).slope;
        pass = pass && a <= kCantorWithoutMax && b >= kCantorWithMin;
        d << "; Cantor r=" << fix(ratio) << " slopes " << fix(a) << " / " << fix(b);
    }
    d << " (atom -0.5 +- " << kStrongAtomSlopeTol << " / 0 +- " << kFlatSlopeTol << "; AC 0 +- " << kFlatSlopeTol
      << "; Cantor <= " << kCantorWithoutMax << " / >= " << kCantorWithMin << ")";
    return {pass, d.str()};
}

bool singular_component(const std::string& id) { return id.rfind("atom", 0) == 0 || id.rfind("cantor", 0) == 0; }

std::pair<bool, std::string> weak_traces() {
    double worst = 0.0;
    std::string worst_at;
    int vectors = 0;
    for (const auto& name : zoo_names()) {
        const Scenario s = load(name);
        const OperatorModel m = build_model(s);
        for (const auto& reg : regions(s))
            for (const auto& d : region_dictionary(s.measure, reg.lo, reg.hi, s.seed)) {
                // singular by construction: singular components, or any vector of a purely singular scenario
                if (!(singular_component(d.id) || s.expect == std::string("singular"))) continue;
                const auto t = smirnov_weak_trace(m, d.vector, d.vector, s.eps_ladder);
                double mn = INFINITY, mx = 0.0;
                for (const auto& p : t) mn = std::min(mn, p.weighted), mx = std::max(mx, p.weighted);
                const double r = mx / mn;
                ++vectors;
                if (r > worst) worst = r, worst_at = name + "/" + d.id;
            }
    }
    // spectrally orthogonal pairs: disjoint components of one measure
    int orthogonal = 0, nonzero = 0;
    for (const char* name : {"zoo/mix_all_gap.json", "zoo/atoms_in_delta.json", "bump_control.json"}) {
        const Scenario s = load(name);
        const OperatorModel m = build_model(s);
        const AnnihilatorBundle b = build_bundle(s, m);
        const RegionSpec reg = regions(s).front();
        const auto dict = region_dictionary(s.measure, reg.lo, reg.hi, s.seed);
        for (const auto& u : dict)
            for (const auto& v : dict) {
                if (!u.component || !v.component || u.id == v.id) continue;
                if (std::abs(inner_product(s.measure, u.vector, v.vector)) != 0.0) continue;
                ++orthogonal;
                for (const auto& p : smirnov_weak_trace(m, u.vector, v.vector, s.eps_ladder))
                    if (p.bare != 0.0 || p.weighted != 0.0 || p.mirror_bare != 0.0 || p.mirror_weighted != 0.0) ++nonzero;
                const auto t = s.mode == AnnihilatorMode::thm2 ? weak_trace_thm2(b, u.vector, v.vector, s.eps_ladder)
                                                               : weak_trace_thm3(b, u.vector, v.vector, s.eps_ladder);
                for (cplx z : t)
                    if (z != 0.0) ++nonzero;
            }
    }
    const bool pass = worst <= kWeakRatioMax && orthogonal > 0 && nonzero == 0;
    return {pass, std::to_string(vectors) + " singular vectors, max weighted max/min " + fix(worst) + " at " + worst_at +
                      " (<= " + fix(kWeakRatioMax) + "); " + std::to_string(orthogonal) +
                      " orthogonal pairs, nonzero trace values " + std::to_string(nonzero)};
}

// ---------------------------------------------------------------- 10-11: zoo

std::map<std::string, std::string> g_reports;  // rank-one report JSON by scenario, for determinism

std::pair<bool, std::string> classification() {
    int errors = 0, flips = 0, mixtures = 0, regions_seen = 0;
    std::string notes;
    const auto names = zoo_names();
    for (const auto& name : names) {
        const Scenario s = load(name);
        ScenarioReport r = run_scenario(s);
        r.runtime_ms.reset();
        g_reports[name] = report_json(r);
        ScenarioReport r2 = run_scenario(with_rank_two(s));
        for (std::size_t i = 0; i < r.regions.size(); ++i) {
            ++regions_seen;
            const RegionReport& reg = r.regions[i];
            if (!s.expect || to_string(reg.verdict) != *s.expect) {
                ++errors;
                notes += " " + name + ":" + to_string(reg.verdict);
            }
            if (s.expect == std::string("mixed")) {
                ++mixtures;
                bool evidence = !reg.vectors.empty();
                for (const auto& v : reg.vectors) evidence = evidence && v.evidence.size() >= 3;
                if (!evidence) {
                    ++errors;
                    notes += " " + name + ":missing-evidence";
                }
            }
            if (r2.regions[i].verdict != reg.verdict) {
                ++flips;
                notes += " " + name + ":rank2=" + to_string(r2.regions[i].verdict);
            }
        }
    }
    const bool pass = names.size() == 12 && errors == 0 && flips == 0 && mixtures == 3;
    return {pass, std::to_string(names.size()) + " scenarios, " + std::to_string(regions_seen) + " regions, " +
                      std::to_string(errors) + " errors, " + std::to_string(mixtures) + " mixtures, " +
                      std::to_string(flips) + " rank-2 changes" + notes};
}

std::pair<bool, std::string> determinism() {
    int differ = 0;
    for (const auto& [name, json] : g_reports) {
        Scenario s = load(name);
        ScenarioReport r = run_scenario(s);
        r.runtime_ms.reset();
        if (report_json(r) != json) ++differ;
    }
    return {!g_reports.empty() && differ == 0,
            std::to_string(g_reports.size()) + " scenarios rerun, " + std::to_string(differ) + " reports differ"};
}

}  // namespace

int main(int argc, char** argv) {
    g_dir = argc > 1 ? fs::path(argv[1]) : fs::path(SPECANN_SCENARIOS);
    check(1, "rank-one consistency", rank_one_consistency);
    check(2, "normalization", normalization);
    check(3, "contractivity", contractivity);
    check(4, "outer round trip", outer_round_trip);
    check(5, "Hilbert-transform oracle", hilbert_oracle);
    check(6, "gap annihilation", gap_annihilation);
    check(7, "bump annihilation", bump_annihilation);
    check(8, "strong Smirnov slopes", strong_slopes);
    check(9, "weak Smirnov traces", weak_traces);
    check(10, "zoo classification", classification);
    check(11, "determinism", determinism);
    std::cout << (g_failed == 0 ? "all criteria PASS" : std::to_string(g_failed) + " criteria FAIL") << std::endl;
    return g_failed == 0 ? 0 : 1;
}
