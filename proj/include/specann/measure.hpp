#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <vector>

#include "specann/polynomial.hpp"

namespace specann {

struct Atom {
    double position = 0.0;
    double weight = 0.0;
};

/// Absolutely continuous component: polynomial density on [lo, hi].
struct AcPiece {
    double lo = 0.0;
    double hi = 0.0;
    std::vector<double> density;  // coefficients in k, lowest degree first

    double mass() const;
};

/// Two-branch affine IFS measure on [lo, hi] (middle-Cantor type).
///
/// The left branch contracts towards lo, the right towards hi, both by
/// `ratio`; the left branch carries probability `p`.
struct ScPiece {
    double lo = 0.0;
    double hi = 1.0;
    double ratio = 1.0 / 3.0;
    double p = 0.5;
    double mass = 1.0;
    int max_depth = 20;

    /// Smallest depth whose leaf length (hi - lo) r^d does not exceed `resolution`.
    int depth_for(double resolution) const;
};

/// 2^depth leaf atoms at leaf-interval midpoints, ordered left to right.
std::vector<Atom> refine_sc(const ScPiece& piece, int depth);

enum class ComponentKind : std::uint8_t { atom, ac, sc };

struct ComponentRef {
    ComponentKind kind = ComponentKind::atom;
    int index = 0;
    auto operator<=>(const ComponentRef&) const = default;
};

/// Compactly supported positive measure: atoms + polynomial densities + IFS pieces.
class SpectralMeasure {
public:
    SpectralMeasure() = default;
    SpectralMeasure(std::vector<Atom> atoms, std::vector<AcPiece> ac, std::vector<ScPiece> sc);

    const std::vector<Atom>& atoms() const { return atoms_; }
    const std::vector<AcPiece>& ac_pieces() const { return ac_; }
    const std::vector<ScPiece>& sc_pieces() const { return sc_; }

    double total_mass() const { return total_mass_; }
    bool empty() const { return atoms_.empty() && ac_.empty() && sc_.empty(); }

    /// Smallest closed interval containing every component.
    std::pair<double, double> hull() const;

    /// True if x lies on an atom, inside a closed AC interval or inside an sc hull.
    bool touches(double x) const;
    /// True if x is an atom or lies inside an sc hull (where +i0 limits need smoothing).
    bool touches_singular(double x) const;
    /// Distance from x to the nearest component (0 when touching).
    double distance_to_support(double x) const;

    std::vector<ComponentRef> components() const;
    /// Closed interval covered by a component.
    std::pair<double, double> component_interval(const ComponentRef& c) const;
    double component_mass(const ComponentRef& c) const;

    /// Leaves of sc piece `index` at `depth`; cached, safe for concurrent callers.
    std::shared_ptr<const std::vector<Atom>> leaves(int index, int depth) const;

private:
    std::vector<Atom> atoms_;
    std::vector<AcPiece> ac_;
    std::vector<ScPiece> sc_;
    double total_mass_ = 0.0;

    struct LeafCache {
        std::mutex mutex;
        std::map<std::pair<int, int>, std::shared_ptr<const std::vector<Atom>>> entries;
    };
    std::shared_ptr<LeafCache> cache_ = std::make_shared<LeafCache>();
};

/// One polynomial piece of a symbol, active on the closed interval [lo, hi].
struct SymbolPiece {
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
    Poly poly;
};

/// A vector of L^2(mu) given by its symbol w(k) (sum of the active pieces).
///
/// An optional component mask restricts the vector to the spectral subspace
/// of the listed components; this is how an AC piece and an atom sitting on
/// top of it are told apart.
class SymbolVector {
public:
    SymbolVector() = default;
    explicit SymbolVector(std::vector<SymbolPiece> pieces, std::optional<std::vector<ComponentRef>> mask = {});

    /// The generating vector: w = 1 everywhere.
    static SymbolVector one();
    /// w(k) = k, the second coupling vector of the rank-two default.
    static SymbolVector identity();
    static SymbolVector indicator(double lo, double hi);
    static SymbolVector zero();

    cplx operator()(double k) const;
    bool active(const ComponentRef& c) const;

    SymbolVector masked(std::vector<ComponentRef> mask) const;
    /// Spectral projection E(lo, hi) (closed interval).
    SymbolVector restricted(double lo, double hi) const;

    const std::vector<SymbolPiece>& pieces() const { return pieces_; }
    const std::optional<std::vector<ComponentRef>>& mask() const { return mask_; }

    /// Piece endpoints that fall strictly inside (lo, hi).
    std::vector<double> breakpoints(double lo, double hi) const;
    /// Sum of the pieces active on the open interval (lo, hi).
    Poly poly_on(double lo, double hi) const;

private:
    std::vector<SymbolPiece> pieces_;
    std::optional<std::vector<ComponentRef>> mask_;
};

/// <u, v> = integral of u conj(v) dmu.
cplx inner_product(const SpectralMeasure& mu, const SymbolVector& u, const SymbolVector& v, int sc_depth = 16);

struct TransformOptions {
    /// sc leaves are refined until their length is below this fraction of the evaluation scale.
    double sc_resolution_fraction = 0.1;
};

/// The complex measure u conj(v) dmu, preprocessed for repeated Cauchy-transform evaluation.
class WeightedMeasure {
public:
    WeightedMeasure(const SpectralMeasure& mu, const SymbolVector& u, const SymbolVector& v,
                    TransformOptions opt = {});
    /// Weight f = 1.
    explicit WeightedMeasure(const SpectralMeasure& mu, TransformOptions opt = {});

    /// Integral of f(k) / (k - lambda).
    ///
    /// Im lambda may be +-0 when Re lambda avoids atoms and sc hulls; the sign of
    /// the zero picks the side of the boundary value on AC intervals. Real
    /// lambda on an atom or sc hull raises BoundaryEvaluationError.
    cplx transform(cplx lambda) const;

    /// Integral of g(k) f(k) dmu(k): atoms summed, AC pieces by adaptive
    /// quadrature (to `abs_tol`, or 1e-9 relative), sc pieces through leaves
    /// no longer than `resolution`.
    cplx integrate(const std::function<cplx(double)>& g, double resolution,
                   std::span<const double> extra_breaks = {}, double abs_tol = 1e-15) const;

    /// Total weight, i.e. the integral of f dmu.
    cplx total() const;

    const SpectralMeasure& measure() const { return *mu_; }

private:
    struct AcSegment {
        double center, half;
        Poly local;   // weight * density in the local variable s
        Poly global;  // weight * density in k
    };
    struct ScWeighted {
        int index;
        SymbolVector u, v;
    };

    std::shared_ptr<const SpectralMeasure> mu_;
    std::vector<double> atom_positions_;
    std::vector<cplx> atom_weights_;
    std::vector<AcSegment> segments_;
    std::vector<ScWeighted> sc_;
    TransformOptions opt_;

    std::shared_ptr<const std::vector<std::pair<double, cplx>>> weighted_leaves(const ScWeighted& s, int depth) const;
    struct LeafCache {
        std::mutex mutex;
        std::map<std::pair<int, int>, std::shared_ptr<const std::vector<std::pair<double, cplx>>>> entries;
    };
    std::shared_ptr<LeafCache> cache_ = std::make_shared<LeafCache>();
};

/// Integral of u conj(v) / (k - lambda) dmu(k).
cplx weighted_borel_transform(const SpectralMeasure& mu, const SymbolVector& u, const SymbolVector& v, cplx lambda);
/// Integral of 1 / (k - lambda) dmu(k).
cplx borel_transform(const SpectralMeasure& mu, cplx lambda);

/// Im of the weighted transform at x + i eps (eps > 0).
double poisson_imaginary(const SpectralMeasure& mu, const SymbolVector& u, const SymbolVector& v, double x, double eps);

}  // namespace specann
