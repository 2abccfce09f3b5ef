#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "specann/annihilator.hpp"
#include "specann/hardy.hpp"
#include "specann/operator.hpp"

namespace specann {

/// {1e-1, 3e-2, 1e-2, 3e-3, 1e-3, 3e-4, 1e-4}.
std::vector<double> default_eps_ladder();

struct DetectOptions {
    LineGridSpec grid;
    /// Half-width T at which the bare (unweighted) L^1 norm is truncated.
    double bare_halfwidth = 1e3;
};

struct StrongPoint {
    double eps = 0.0;
    double without_delta = 0.0;  // || alpha (A - lambda)^{-1} u || on Im lambda = eps
    double with_delta = 0.0;     // same, multiplied by delta_+
    double mirror_without = 0.0; // Im lambda = -eps
    double mirror_with = 0.0;    // multiplied by delta_-
};

/// L^2 line norms of lambda -> alpha (A - lambda)^{-1} u, alpha = sqrt(2V), with and
/// without the determinant factor.
std::vector<StrongPoint> smirnov_strong_trace(const OperatorModel& model, const SymbolVector& u,
                                              std::span<const double> eps_ladder, const DetectOptions& opt = {});

/// The without-delta column of the strong trace: the H^2 test for AC vectors.
std::vector<double> ac_baseline_trace(const OperatorModel& model, const SymbolVector& u,
                                      std::span<const double> eps_ladder, const DetectOptions& opt = {});

struct WeakPoint {
    double eps = 0.0;
    double bare = 0.0;           // L^1 of <(A - lambda)^{-1} u, v> over |t| <= T
    double weighted = 0.0;       // L^1 of delta_+ nu_+ <(A - lambda)^{-1} u, v>, nu_+ = 1/(lambda + i)
    double mirror_bare = 0.0;
    double mirror_weighted = 0.0;  // delta_- nu_-, nu_- = 1/(lambda - i)
    /// Bare norm at T = 1e2, 1e3, 1e4: logarithmic growth in T exposes singular mass.
    std::vector<std::pair<double, double>> bare_tscan;
};

/// L^1 line norms of the scalar resolvent pairing, bare and delta-nu weighted.
std::vector<WeakPoint> smirnov_weak_trace(const OperatorModel& model, const SymbolVector& u, const SymbolVector& v,
                                          std::span<const double> eps_ladder, const DetectOptions& opt = {});

struct SlopeFit {
    double slope = 0.0;
    double residual = 0.0;  // RMS of the log-log fit residuals
    int points = 0;
};

/// Least squares of log value on log eps over the last `last` ladder points.
/// Zero or non-finite values make the fit fail with NumericError.
SlopeFit fit_log_slope(std::span<const double> eps, std::span<const double> values, int last = 5);

// ---------------------------------------------------------------- classification

enum class Verdict : std::uint8_t { singular, absolutely_continuous, mixed, inconclusive };
std::string to_string(Verdict v);

/// Thresholds of the classifier. The converse direction (bounded norms
/// implying AC, annihilation implying singular) is a calibrated heuristic,
/// not a proven implication; reports carry these constants so calls can be audited.
struct Calibration {
    double unbounded_slope = -0.35;  // without-delta slope at or below: unbounded
    double bounded_slope = -0.1;     // at or above: bounded
    double max_residual = 0.2;       // fits worse than this are inconclusive
    int fit_points = 5;
    double vanish_ratio = 0.05;      // |T(eps_min)| <= ratio sup |T|: annihilated
    double vanish_slope = 0.25;      // or |T| decays at least this fast (clean fit)
    double persist_ratio = 0.5;      // |T(eps_min)| >= ratio sup |T|: persistent
    double weak_bounded_ratio = 1.5; // max/min of the weighted weak norms
};

/// One detector's contribution for one vector.
struct Evidence {
    std::string detector;  // smirnov_strong, smirnov_strong_delta, smirnov_weak, weak_thm2, weak_thm3
    std::string vector_id;
    std::vector<double> eps;
    std::vector<double> norms;      // norm-type traces (|T| for annihilation traces)
    std::vector<cplx> values;       // annihilation: T_eps; smirnov_weak: bare L^1 norm (real)
    SlopeFit fit;
    std::optional<double> ratio;    // |T(eps_min)| / sup |T|, or max/min for weak norms
    std::string call;               // unbounded, bounded, intermediate, vanishing, persistent, unclear, poor-fit
};

struct VectorVerdict {
    std::string vector_id;
    Verdict verdict = Verdict::inconclusive;
    std::vector<Evidence> evidence;
};

struct RegionReport {
    std::string region;  // e.g. "(-inf,-0.25)" or "[-2,-0.5]"
    Verdict verdict = Verdict::inconclusive;
    std::vector<VectorVerdict> vectors;
};

/// Named test vector of the per-region dictionary.
struct DictionaryEntry {
    std::string id;
    SymbolVector vector;
    /// Indicator of one spectral component (as opposed to a random probe).
    bool component = false;
};

/// Indicators of every component inside the region, restricted to it (atom{i},
/// ac{i}, cantor{i}, indices into the measure's lists), plus two random
/// piecewise-linear symbols rand0, rand1 drawn with `seed`. Components that do
/// not meet the region are skipped.
std::vector<DictionaryEntry> region_dictionary(const SpectralMeasure& mu, double lo, double hi, std::uint64_t seed);

/// Annihilation trace magnitudes: identically zero traces count as vanishing.
Evidence annihilation_evidence(std::string detector, std::string vector_id, std::span<const double> eps,
                               std::vector<cplx> values, const Calibration& cal);
Evidence strong_evidence(std::string vector_id, std::span<const StrongPoint> trace, bool with_delta,
                         const Calibration& cal);
Evidence weak_evidence(std::string vector_id, std::span<const WeakPoint> trace, const Calibration& cal);

/// Verdict for one vector from its evidence. Needs strong, strong_delta and one
/// annihilation trace; throws std::invalid_argument otherwise.
Verdict classify_vector(std::span<const Evidence> evidence, const Calibration& cal);

/// Region verdict from per-vector verdicts: component indicators decide, random
/// probes may only corroborate; any conflict or unclear component gives inconclusive.
/// Throws std::invalid_argument on an empty report set.
Verdict classify(std::span<const VectorVerdict> vectors, std::span<const DictionaryEntry> dictionary);

struct RegionSpec {
    double lo = 0.0;
    double hi = 0.0;
    std::string label;
};

/// Runs every detector over the region dictionary. `bundle` supplies the
/// annihilation trace (gap or bump construction).
RegionReport detect_region(const OperatorModel& model, const AnnihilatorBundle& bundle, const RegionSpec& region,
                           std::span<const double> eps_ladder, std::uint64_t seed, const Calibration& cal = {},
                           const DetectOptions& opt = {});

}  // namespace specann
