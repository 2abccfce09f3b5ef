#include "specann/detect.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <stdexcept>
#include <thread>

#include "specann/errors.hpp"

namespace specann {

namespace {

// Runs fn(0..n-1); results must be written by index so the order of
// completion never shows in the output.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
    const std::size_t workers = std::min<std::size_t>(n, std::max(1u, std::thread::hardware_concurrency()));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::exception_ptr> errors(n);
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w)
        pool.emplace_back([&, w] {
            for (std::size_t i = w; i < n; i += workers) {
                try {
                    fn(i);
                } catch (...) {
                    errors[i] = std::current_exception();
                }
            }
        });
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

void validate_ladder(std::span<const double> ladder) {
    if (ladder.empty()) throw std::invalid_argument("eps ladder is empty");
    for (std::size_t i = 0; i < ladder.size(); ++i) {
        if (!(ladder[i] > 0.0) || !std::isfinite(ladder[i]))
            throw std::invalid_argument("eps ladder values must be positive and finite");
        if (i > 0 && !(ladder[i] < ladder[i - 1])) throw std::invalid_argument("eps ladder must be strictly decreasing");
    }
}

// Where the line functions vary on the scale eps: atoms, AC endpoints, symbol
// breakpoints and the sc leaves that are still longer than eps.
std::vector<std::pair<double, double>> line_features(const OperatorModel& model, std::span<const SymbolVector* const> vecs,
                                                     double eps) {
    const SpectralMeasure& mu = model.measure();
    std::vector<std::pair<double, double>> f;
    for (const auto& a : mu.atoms()) f.emplace_back(a.position, a.position);
    for (const auto& p : mu.ac_pieces()) {
        f.emplace_back(p.lo, p.lo);
        f.emplace_back(p.hi, p.hi);
    }
    const auto [lo, hi] = mu.hull();
    auto add_breaks = [&](const SymbolVector& s) {
        for (double b : s.breakpoints(lo, hi)) f.emplace_back(b, b);
    };
    for (const SymbolVector* v : vecs) add_breaks(*v);
    for (const auto& c : model.couplings()) add_breaks(c.vector);
    const auto& sc = mu.sc_pieces();
    for (int i = 0; i < static_cast<int>(sc.size()); ++i) {
        const ScPiece& p = sc[static_cast<std::size_t>(i)];
        const int depth = std::min(p.depth_for(eps), p.max_depth);
        const double half = 0.5 * (p.hi - p.lo) * std::pow(p.ratio, depth);
        for (const auto& leaf : *mu.leaves(i, depth)) f.emplace_back(leaf.position - half, leaf.position + half);
    }
    return f;
}

std::vector<double> line_grid(const OperatorModel& model, std::span<const SymbolVector* const> vecs, double eps,
                              const DetectOptions& opt) {
    const auto [lo, hi] = model.measure().hull();
    return graded_line_grid(lo, hi, line_features(model, vecs, eps), eps, opt.grid);
}

// L^1 norm over the grid, continued as |f(t0)| |t0| / |t| out to |t| = T.
double truncated_l1(const std::vector<double>& grid, const std::vector<cplx>& vals, double eps, double T) {
    double acc = line_norm(LineTrace{eps, grid, vals, std::nullopt}, 1);
    for (std::size_t i : {std::size_t{0}, grid.size() - 1}) {
        const double t0 = std::abs(grid[i]);
        if (T > t0) acc += std::abs(vals[i]) * t0 * std::log(T / t0);
    }
    return acc;
}

}  // namespace

std::vector<double> default_eps_ladder() { return {1e-1, 3e-2, 1e-2, 3e-3, 1e-3, 3e-4, 1e-4}; }

// ---------------------------------------------------------------- line traces

std::vector<StrongPoint> smirnov_strong_trace(const OperatorModel& model, const SymbolVector& u,
                                              std::span<const double> eps_ladder, const DetectOptions& opt) {
    validate_ladder(eps_ladder);
    const SpectralMeasure& mu = model.measure();
    std::vector<WeightedMeasure> pairs;
    std::vector<double> scale;
    for (const auto& c : model.couplings()) {
        pairs.emplace_back(mu, u, c.vector);
        scale.push_back(2.0 * c.strength);
    }
    const SymbolVector* vecs[] = {&u};
    std::vector<StrongPoint> out(eps_ladder.size());
    parallel_for(eps_ladder.size(), [&](std::size_t n) {
        const double eps = eps_ladder[n];
        const std::vector<double> grid = line_grid(model, vecs, eps, opt);
        StrongPoint& p = out[n];
        p.eps = eps;
        for (double side : {1.0, -1.0}) {
            std::vector<cplx> bare(grid.size()), with(grid.size());
            for (std::size_t i = 0; i < grid.size(); ++i) {
                const cplx lam(grid[i], side * eps);
                double s = 0.0;
                for (std::size_t j = 0; j < pairs.size(); ++j) s += scale[j] * std::norm(pairs[j].transform(lam));
                const double nrm = std::sqrt(s);
                bare[i] = nrm;
                with[i] = nrm == 0.0 ? 0.0 : nrm * std::abs(delta(model, lam));
            }
            // alpha (A - lambda)^{-1} u ~ 1/|t| at infinity, and delta -> 1
            const double a = line_norm(LineTrace{eps, grid, std::move(bare), 1.0}, 2);
            const double b = line_norm(LineTrace{eps, grid, std::move(with), 1.0}, 2);
            (side > 0 ? p.without_delta : p.mirror_without) = a;
            (side > 0 ? p.with_delta : p.mirror_with) = b;
        }
    });
    return out;
}

std::vector<double> ac_baseline_trace(const OperatorModel& model, const SymbolVector& u,
                                      std::span<const double> eps_ladder, const DetectOptions& opt) {
    std::vector<double> out;
    for (const auto& p : smirnov_strong_trace(model, u, eps_ladder, opt)) out.push_back(p.without_delta);
    return out;
}

std::vector<WeakPoint> smirnov_weak_trace(const OperatorModel& model, const SymbolVector& u, const SymbolVector& v,
                                          std::span<const double> eps_ladder, const DetectOptions& opt) {
    validate_ladder(eps_ladder);
    const WeightedMeasure wm(model.measure(), u, v);
    const SymbolVector* vecs[] = {&u, &v};
    const cplx I(0.0, 1.0);
    std::vector<WeakPoint> out(eps_ladder.size());
    parallel_for(eps_ladder.size(), [&](std::size_t n) {
        const double eps = eps_ladder[n];
        const std::vector<double> grid = line_grid(model, vecs, eps, opt);
        WeakPoint& p = out[n];
        p.eps = eps;
        for (double side : {1.0, -1.0}) {
            std::vector<cplx> bare(grid.size()), weighted(grid.size());
            for (std::size_t i = 0; i < grid.size(); ++i) {
                const cplx lam(grid[i], side * eps);
                bare[i] = wm.transform(lam);
                const cplx nu = 1.0 / (lam + side * I);
                weighted[i] = bare[i] == 0.0 ? cplx(0.0) : bare[i] * delta(model, lam) * nu;
            }
            const double w = line_norm(LineTrace{eps, grid, std::move(weighted), 2.0}, 1);
            if (side > 0) {
                p.weighted = w;
                p.bare = truncated_l1(grid, bare, eps, opt.bare_halfwidth);
                for (double T : {1e2, 1e3, 1e4}) p.bare_tscan.emplace_back(T, truncated_l1(grid, bare, eps, T));
            } else {
                p.mirror_weighted = w;
                p.mirror_bare = truncated_l1(grid, bare, eps, opt.bare_halfwidth);
            }
        }
    });
    return out;
}

SlopeFit fit_log_slope(std::span<const double> eps, std::span<const double> values, int last) {
    if (eps.size() != values.size()) throw std::invalid_argument("slope fit needs matching eps and values");
    const std::size_t n = std::min<std::size_t>(eps.size(), static_cast<std::size_t>(std::max(last, 2)));
    if (n < 2) throw std::invalid_argument("slope fit needs at least two points");
    const std::size_t first = eps.size() - n;
    std::vector<double> x, y;
    for (std::size_t i = first; i < eps.size(); ++i) {
        if (!(values[i] > 0.0) || !std::isfinite(values[i]) || !(eps[i] > 0.0))
            throw NumericError("slope fit needs positive finite values; got " + std::to_string(values[i]) + " at eps " +
                               std::to_string(eps[i]));
        x.push_back(std::log(eps[i]));
        y.push_back(std::log(values[i]));
    }
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    SlopeFit f;
    f.points = static_cast<int>(n);
    f.slope = sxy / sxx;
    double ss = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = y[i] - (my + f.slope * (x[i] - mx));
        ss += r * r;
    }
    f.residual = std::sqrt(ss / static_cast<double>(n));
    return f;
}

// ---------------------------------------------------------------- classification

std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::singular: return "singular";
        case Verdict::absolutely_continuous: return "absolutely-continuous";
        case Verdict::mixed: return "mixed";
        case Verdict::inconclusive: return "inconclusive";
    }
    return "inconclusive";
}

std::vector<DictionaryEntry> region_dictionary(const SpectralMeasure& mu, double lo, double hi, std::uint64_t seed) {
    std::vector<DictionaryEntry> out;
    const auto& atoms = mu.atoms();
    for (int i = 0; i < static_cast<int>(atoms.size()); ++i) {
        const double x = atoms[static_cast<std::size_t>(i)].position;
        if (x >= lo && x <= hi)
            out.push_back({"atom" + std::to_string(i), SymbolVector::one().masked({{ComponentKind::atom, i}}), true});
    }
    const auto& ac = mu.ac_pieces();
    for (int i = 0; i < static_cast<int>(ac.size()); ++i) {
        const auto& p = ac[static_cast<std::size_t>(i)];
        if (std::min(p.hi, hi) > std::max(p.lo, lo))
            out.push_back({"ac" + std::to_string(i),
                           SymbolVector::one().masked({{ComponentKind::ac, i}}).restricted(lo, hi), true});
    }
    const auto& sc = mu.sc_pieces();
    for (int i = 0; i < static_cast<int>(sc.size()); ++i) {
        const auto& p = sc[static_cast<std::size_t>(i)];
        if (std::min(p.hi, hi) > std::max(p.lo, lo))
            out.push_back({"cantor" + std::to_string(i),
                           SymbolVector::one().masked({{ComponentKind::sc, i}}).restricted(lo, hi), true});
    }
    if (out.empty()) return out;
    // random probes: piecewise-linear symbols with values in [0.5, 1.5] on the
    // part of the hull inside the region
    const auto hull = mu.hull();
    const double a = std::max(lo, hull.first) - 1e-9, b = std::min(hi, hull.second) + 1e-9;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> val(0.5, 1.5);
    for (int r = 0; r < 2; ++r) {
        constexpr int pieces = 4;
        std::vector<SymbolPiece> ps;
        double left = val(rng);
        for (int k = 0; k < pieces; ++k) {
            // half-open in effect: the next piece starts just past this one's end
            const double x0 = a + (b - a) * k / pieces, x1 = a + (b - a) * (k + 1) / pieces;
            const double right = val(rng);
            const double slope = (right - left) / (x1 - x0);
            const double lo_k = k == 0 ? x0 : std::nextafter(x0, x1);
            ps.push_back({lo_k, x1, Poly::from_real({left - slope * x0, slope})});
            left = right;
        }
        out.push_back({"rand" + std::to_string(r), SymbolVector(std::move(ps)).restricted(lo, hi), false});
    }
    return out;
}

Evidence strong_evidence(std::string vector_id, std::span<const StrongPoint> trace, bool with_delta,
                         const Calibration& cal) {
    Evidence e;
    e.detector = with_delta ? "smirnov_strong_delta" : "smirnov_strong";
    e.vector_id = std::move(vector_id);
    for (const auto& p : trace) {
        e.eps.push_back(p.eps);
        e.norms.push_back(with_delta ? p.with_delta : p.without_delta);
    }
    if (std::all_of(e.norms.begin(), e.norms.end(), [](double v) { return v == 0.0; })) {
        e.call = "zero";
        return e;
    }
    e.fit = fit_log_slope(e.eps, e.norms, cal.fit_points);
    if (e.fit.residual > cal.max_residual) e.call = "poor-fit";
    else if (e.fit.slope <= cal.unbounded_slope) e.call = "unbounded";
    else if (e.fit.slope >= cal.bounded_slope) e.call = "bounded";
    else e.call = "intermediate";
    return e;
}

Evidence weak_evidence(std::string vector_id, std::span<const WeakPoint> trace, const Calibration& cal) {
    Evidence e;
    e.detector = "smirnov_weak";
    e.vector_id = std::move(vector_id);
    for (const auto& p : trace) {
        e.eps.push_back(p.eps);
        e.norms.push_back(p.weighted);
        e.values.emplace_back(p.bare, 0.0);
    }
    const auto [mn, mx] = std::minmax_element(e.norms.begin(), e.norms.end());
    if (*mx == 0.0) {
        e.call = "zero";
        return e;
    }
    e.fit = fit_log_slope(e.eps, e.norms, cal.fit_points);
    e.ratio = *mx / std::max(*mn, std::numeric_limits<double>::min());
    e.call = *e.ratio <= cal.weak_bounded_ratio ? "bounded" : "unbounded";
    return e;
}

Evidence annihilation_evidence(std::string detector, std::string vector_id, std::span<const double> eps,
                               std::vector<cplx> values, const Calibration& cal) {
    Evidence e;
    e.detector = std::move(detector);
    e.vector_id = std::move(vector_id);
    e.eps.assign(eps.begin(), eps.end());
    for (cplx z : values) e.norms.push_back(std::abs(z));
    e.values = std::move(values);
    const double sup = *std::max_element(e.norms.begin(), e.norms.end());
    if (sup == 0.0) {
        e.ratio = 0.0;
        e.call = "vanishing";
        return e;
    }
    e.ratio = e.norms.back() / sup;
    if (std::all_of(e.norms.begin(), e.norms.end(), [](double v) { return v > 0.0; }))
        e.fit = fit_log_slope(e.eps, e.norms, cal.fit_points);
    const bool decaying = e.fit.points > 0 && e.fit.residual <= cal.max_residual && e.fit.slope >= cal.vanish_slope;
    if (*e.ratio <= cal.vanish_ratio || decaying) e.call = "vanishing";
    else if (*e.ratio >= cal.persist_ratio) e.call = "persistent";
    else e.call = "unclear";
    return e;
}

Verdict classify_vector(std::span<const Evidence> evidence, const Calibration& /*cal*/) {
    const Evidence *strong = nullptr, *delta = nullptr, *weak = nullptr, *annih = nullptr;
    for (const auto& e : evidence) {
        if (e.detector == "smirnov_strong") strong = &e;
        else if (e.detector == "smirnov_strong_delta") delta = &e;
        else if (e.detector == "smirnov_weak") weak = &e;
        else if (e.detector == "weak_thm2" || e.detector == "weak_thm3") annih = &e;
    }
    if (!strong || !delta || !annih)
        throw std::invalid_argument("classification needs strong, strong-with-delta and annihilation evidence");
    if (strong->call == "poor-fit" || strong->call == "zero" || delta->call == "poor-fit") return Verdict::inconclusive;
    const bool not_bounded = strong->call == "unbounded" || strong->call == "intermediate";
    if (annih->call == "vanishing") {
        // singular: necessary conditions all hold and the AC test fails
        const bool weak_ok = !weak || weak->call == "bounded";
        if (not_bounded && delta->call == "bounded" && weak_ok) return Verdict::singular;
        return Verdict::inconclusive;
    }
    if (annih->call == "persistent") {
        if (strong->call == "bounded") return Verdict::absolutely_continuous;
        if (not_bounded) return Verdict::mixed;
    }
    return Verdict::inconclusive;
}

Verdict classify(std::span<const VectorVerdict> vectors, std::span<const DictionaryEntry> dictionary) {
    if (vectors.empty()) throw std::invalid_argument("classification needs at least one vector report");
    auto is_component = [&](const std::string& id) {
        for (const auto& d : dictionary)
            if (d.id == id) return d.component;
        return true;
    };
    bool sing = false, ac = false, mixed = false;
    for (const auto& v : vectors) {
        if (!is_component(v.vector_id)) continue;
        switch (v.verdict) {
            case Verdict::inconclusive: return Verdict::inconclusive;
            case Verdict::singular: sing = true; break;
            case Verdict::absolutely_continuous: ac = true; break;
            case Verdict::mixed: mixed = true; break;
        }
    }
    if (!sing && !ac && !mixed) return Verdict::inconclusive;
    const Verdict region = (mixed || (sing && ac)) ? Verdict::mixed : (sing ? Verdict::singular : Verdict::absolutely_continuous);
    // probes corroborate: in a pure region they must agree or abstain
    for (const auto& v : vectors) {
        if (is_component(v.vector_id) || v.verdict == Verdict::inconclusive || region == Verdict::mixed) continue;
        if (v.verdict != region) return Verdict::inconclusive;
    }
    return region;
}

RegionReport detect_region(const OperatorModel& model, const AnnihilatorBundle& bundle, const RegionSpec& region,
                           std::span<const double> eps_ladder, std::uint64_t seed, const Calibration& cal,
                           const DetectOptions& opt) {
    validate_ladder(eps_ladder);
    RegionReport rep;
    rep.region = region.label;
    const auto dict = region_dictionary(model.measure(), region.lo, region.hi, seed);
    if (dict.empty()) throw PreconditionError("region " + region.label + " contains no spectral component");
    const std::string annih_name = bundle.mode() == AnnihilatorMode::thm2 ? "weak_thm2" : "weak_thm3";
    rep.vectors.resize(dict.size());
    parallel_for(dict.size(), [&](std::size_t i) {
        const DictionaryEntry& d = dict[i];
        VectorVerdict& vv = rep.vectors[i];
        vv.vector_id = d.id;
        const auto strong = smirnov_strong_trace(model, d.vector, eps_ladder, opt);
        const auto weak = smirnov_weak_trace(model, d.vector, d.vector, eps_ladder, opt);
        const auto t = bundle.mode() == AnnihilatorMode::thm2 ? weak_trace_thm2(bundle, d.vector, d.vector, eps_ladder)
                                                             : weak_trace_thm3(bundle, d.vector, d.vector, eps_ladder);
        vv.evidence.push_back(strong_evidence(d.id, strong, false, cal));
        vv.evidence.push_back(strong_evidence(d.id, strong, true, cal));
        vv.evidence.push_back(weak_evidence(d.id, weak, cal));
        vv.evidence.push_back(annihilation_evidence(annih_name, d.id, eps_ladder, t, cal));
        vv.verdict = classify_vector(vv.evidence, cal);
    });
    rep.verdict = classify(rep.vectors, dict);
    return rep;
}

}  // namespace specann
