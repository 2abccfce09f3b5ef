#include "specann/measure.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "specann/errors.hpp"
#include "specann/quadrature.hpp"

namespace specann {

double AcPiece::mass() const { return integrate(Poly::from_real(density), lo, hi).real(); }

int ScPiece::depth_for(double resolution) const {
    if (!(resolution > 0.0)) return std::numeric_limits<int>::max();
    double len = hi - lo;
    int d = 1;
    len *= ratio;
    while (len > resolution) {
        len *= ratio;
        ++d;
        if (d > 64) return d;
    }
    return d;
}

std::vector<Atom> refine_sc(const ScPiece& piece, int depth) {
    if (depth < 1) throw std::invalid_argument("refine_sc: depth must be >= 1");
    if (depth > piece.max_depth)
        throw PrecisionError("refine_sc: depth " + std::to_string(depth) + " exceeds max depth " +
                                 std::to_string(piece.max_depth),
                             depth);
    struct Leaf {
        double a, b, w;
    };
    std::vector<Leaf> cur{{piece.lo, piece.hi, piece.mass}};
    for (int level = 0; level < depth; ++level) {
        std::vector<Leaf> next;
        next.reserve(cur.size() * 2);
        for (const auto& l : cur) {
            const double len = piece.ratio * (l.b - l.a);
            next.push_back({l.a, l.a + len, l.w * piece.p});
            next.push_back({l.b - len, l.b, l.w * (1.0 - piece.p)});
        }
        cur.swap(next);
    }
    std::vector<Atom> out;
    out.reserve(cur.size());
    for (const auto& l : cur) out.push_back({0.5 * (l.a + l.b), l.w});
    return out;
}

// ---------------------------------------------------------------------------

SpectralMeasure::SpectralMeasure(std::vector<Atom> atoms, std::vector<AcPiece> ac, std::vector<ScPiece> sc)
    : atoms_(std::move(atoms)), ac_(std::move(ac)), sc_(std::move(sc)) {
    std::sort(atoms_.begin(), atoms_.end(), [](const Atom& a, const Atom& b) { return a.position < b.position; });
    for (std::size_t i = 0; i < atoms_.size(); ++i) {
        if (!std::isfinite(atoms_[i].position)) throw std::invalid_argument("atom position must be finite");
        if (!(atoms_[i].weight > 0.0)) throw std::invalid_argument("atom weights must be positive");
        if (i > 0 && atoms_[i].position == atoms_[i - 1].position)
            throw std::invalid_argument("atom positions must be pairwise distinct");
    }
    for (const auto& p : ac_) {
        if (!(p.hi > p.lo) || !std::isfinite(p.lo) || !std::isfinite(p.hi))
            throw std::invalid_argument("ac piece needs a finite interval with lo < hi");
        if (p.density.empty()) throw std::invalid_argument("ac piece density has no coefficients");
        const Poly rho = Poly::from_real(p.density);
        constexpr int samples = 256;
        for (int i = 0; i <= samples; ++i) {
            const double k = p.lo + (p.hi - p.lo) * i / samples;
            if (rho.real_at(k) < -1e-12) throw std::invalid_argument("ac density must be nonnegative on its support");
        }
        if (!(p.mass() > 0.0)) throw std::invalid_argument("ac piece must carry positive mass");
    }
    for (const auto& s : sc_) {
        if (!(s.hi > s.lo) || !std::isfinite(s.lo) || !std::isfinite(s.hi))
            throw std::invalid_argument("sc piece needs a finite interval with lo < hi");
        if (!(s.ratio > 0.0 && s.ratio < 0.5)) throw std::invalid_argument("sc contraction ratio must lie in (0, 1/2)");
        if (!(s.p > 0.0 && s.p < 1.0)) throw std::invalid_argument("sc branch weight must lie in (0, 1)");
        if (!(s.mass > 0.0)) throw std::invalid_argument("sc mass must be positive");
        if (s.max_depth < 1 || s.max_depth > 30) throw std::invalid_argument("sc max depth must lie in [1, 30]");
    }
    total_mass_ = 0.0;
    for (const auto& a : atoms_) total_mass_ += a.weight;
    for (const auto& p : ac_) total_mass_ += p.mass();
    for (const auto& s : sc_) total_mass_ += s.mass;
}

std::pair<double, double> SpectralMeasure::hull() const {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (const auto& a : atoms_) lo = std::min(lo, a.position), hi = std::max(hi, a.position);
    for (const auto& p : ac_) lo = std::min(lo, p.lo), hi = std::max(hi, p.hi);
    for (const auto& s : sc_) lo = std::min(lo, s.lo), hi = std::max(hi, s.hi);
    if (lo > hi) return {0.0, 0.0};
    return {lo, hi};
}

bool SpectralMeasure::touches_singular(double x) const {
    for (const auto& a : atoms_)
        if (a.position == x) return true;
    for (const auto& s : sc_)
        if (x >= s.lo && x <= s.hi) return true;
    return false;
}

bool SpectralMeasure::touches(double x) const {
    if (touches_singular(x)) return true;
    for (const auto& p : ac_)
        if (x >= p.lo && x <= p.hi) return true;
    return false;
}

double SpectralMeasure::distance_to_support(double x) const {
    double d = std::numeric_limits<double>::infinity();
    auto interval = [&](double lo, double hi) {
        if (x < lo) d = std::min(d, lo - x);
        else if (x > hi) d = std::min(d, x - hi);
        else d = 0.0;
    };
    for (const auto& a : atoms_) d = std::min(d, std::abs(a.position - x));
    for (const auto& p : ac_) interval(p.lo, p.hi);
    for (const auto& s : sc_) interval(s.lo, s.hi);
    return d;
}

std::vector<ComponentRef> SpectralMeasure::components() const {
    std::vector<ComponentRef> out;
    for (int i = 0; i < static_cast<int>(atoms_.size()); ++i) out.push_back({ComponentKind::atom, i});
    for (int i = 0; i < static_cast<int>(ac_.size()); ++i) out.push_back({ComponentKind::ac, i});
    for (int i = 0; i < static_cast<int>(sc_.size()); ++i) out.push_back({ComponentKind::sc, i});
    return out;
}

std::pair<double, double> SpectralMeasure::component_interval(const ComponentRef& c) const {
    switch (c.kind) {
        case ComponentKind::atom: return {atoms_.at(c.index).position, atoms_.at(c.index).position};
        case ComponentKind::ac: return {ac_.at(c.index).lo, ac_.at(c.index).hi};
        case ComponentKind::sc: return {sc_.at(c.index).lo, sc_.at(c.index).hi};
    }
    return {0.0, 0.0};
}

double SpectralMeasure::component_mass(const ComponentRef& c) const {
    switch (c.kind) {
        case ComponentKind::atom: return atoms_.at(c.index).weight;
        case ComponentKind::ac: return ac_.at(c.index).mass();
        case ComponentKind::sc: return sc_.at(c.index).mass;
    }
    return 0.0;
}

std::shared_ptr<const std::vector<Atom>> SpectralMeasure::leaves(int index, int depth) const {
    std::lock_guard lock(cache_->mutex);
    auto& slot = cache_->entries[{index, depth}];
    if (!slot) slot = std::make_shared<const std::vector<Atom>>(refine_sc(sc_.at(index), depth));
    return slot;
}

// ---------------------------------------------------------------------------

SymbolVector::SymbolVector(std::vector<SymbolPiece> pieces, std::optional<std::vector<ComponentRef>> mask)
    : pieces_(std::move(pieces)), mask_(std::move(mask)) {
    for (const auto& p : pieces_)
        if (!(p.hi >= p.lo)) throw std::invalid_argument("symbol piece needs lo <= hi");
}

SymbolVector SymbolVector::one() { return SymbolVector({SymbolPiece{.poly = Poly::constant(1.0)}}); }

SymbolVector SymbolVector::identity() { return SymbolVector({SymbolPiece{.poly = Poly({0.0, 1.0})}}); }

SymbolVector SymbolVector::indicator(double lo, double hi) {
    return SymbolVector({SymbolPiece{lo, hi, Poly::constant(1.0)}});
}

SymbolVector SymbolVector::zero() { return SymbolVector(); }

cplx SymbolVector::operator()(double k) const {
    cplx acc(0.0, 0.0);
    for (const auto& p : pieces_)
        if (k >= p.lo && k <= p.hi) acc += p.poly(cplx(k, 0.0));
    return acc;
}

bool SymbolVector::active(const ComponentRef& c) const {
    if (!mask_) return true;
    return std::find(mask_->begin(), mask_->end(), c) != mask_->end();
}

SymbolVector SymbolVector::masked(std::vector<ComponentRef> mask) const {
    SymbolVector out = *this;
    if (out.mask_) {
        std::vector<ComponentRef> both;
        for (const auto& c : mask)
            if (active(c)) both.push_back(c);
        out.mask_ = std::move(both);
    } else {
        out.mask_ = std::move(mask);
    }
    return out;
}

SymbolVector SymbolVector::restricted(double lo, double hi) const {
    std::vector<SymbolPiece> out;
    for (const auto& p : pieces_) {
        const double a = std::max(lo, p.lo);
        const double b = std::min(hi, p.hi);
        if (a <= b) out.push_back({a, b, p.poly});
    }
    return SymbolVector(std::move(out), mask_);
}

std::vector<double> SymbolVector::breakpoints(double lo, double hi) const {
    std::vector<double> out;
    for (const auto& p : pieces_) {
        if (p.lo > lo && p.lo < hi) out.push_back(p.lo);
        if (p.hi > lo && p.hi < hi) out.push_back(p.hi);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

Poly SymbolVector::poly_on(double lo, double hi) const {
    Poly acc;
    for (const auto& p : pieces_)
        if (p.lo <= lo && p.hi >= hi) acc = acc + p.poly;
    return acc;
}

// ---------------------------------------------------------------------------

namespace {

bool is_zero(const Poly& p) {
    for (const auto& v : p.c)
        if (v != cplx(0.0, 0.0)) return false;
    return true;
}

}  // namespace

WeightedMeasure::WeightedMeasure(const SpectralMeasure& mu, TransformOptions opt)
    : WeightedMeasure(mu, SymbolVector::one(), SymbolVector::one(), opt) {}

WeightedMeasure::WeightedMeasure(const SpectralMeasure& mu, const SymbolVector& u, const SymbolVector& v,
                                 TransformOptions opt)
    : mu_(std::make_shared<const SpectralMeasure>(mu)), opt_(opt) {
    const auto& atoms = mu_->atoms();
    for (int i = 0; i < static_cast<int>(atoms.size()); ++i) {
        const ComponentRef c{ComponentKind::atom, i};
        if (!u.active(c) || !v.active(c)) continue;
        const double a = atoms[i].position;
        const cplx w = atoms[i].weight * u(a) * std::conj(v(a));
        if (w == cplx(0.0, 0.0)) continue;
        atom_positions_.push_back(a);
        atom_weights_.push_back(w);
    }
    const auto& ac = mu_->ac_pieces();
    for (int i = 0; i < static_cast<int>(ac.size()); ++i) {
        const ComponentRef c{ComponentKind::ac, i};
        if (!u.active(c) || !v.active(c)) continue;
        std::vector<double> cuts{ac[i].lo};
        for (double x : u.breakpoints(ac[i].lo, ac[i].hi)) cuts.push_back(x);
        for (double x : v.breakpoints(ac[i].lo, ac[i].hi)) cuts.push_back(x);
        cuts.push_back(ac[i].hi);
        std::sort(cuts.begin(), cuts.end());
        cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
        const Poly rho = Poly::from_real(ac[i].density);
        for (std::size_t j = 0; j + 1 < cuts.size(); ++j) {
            const double p = cuts[j], q = cuts[j + 1];
            const Poly g = rho * u.poly_on(p, q) * v.poly_on(p, q).conjugated();
            if (g.empty() || is_zero(g)) continue;
            const double center = 0.5 * (p + q), half = 0.5 * (q - p);
            segments_.push_back({center, half, g.rescaled(center, half), g});
        }
    }
    const auto& sc = mu_->sc_pieces();
    for (int i = 0; i < static_cast<int>(sc.size()); ++i) {
        const ComponentRef c{ComponentKind::sc, i};
        if (!u.active(c) || !v.active(c)) continue;
        sc_.push_back({i, u, v});
    }
}

std::shared_ptr<const std::vector<std::pair<double, cplx>>> WeightedMeasure::weighted_leaves(const ScWeighted& s,
                                                                                              int depth) const {
    {
        std::lock_guard lock(cache_->mutex);
        auto it = cache_->entries.find({s.index, depth});
        if (it != cache_->entries.end()) return it->second;
    }
    const auto leaves = mu_->leaves(s.index, depth);
    auto out = std::make_shared<std::vector<std::pair<double, cplx>>>();
    out->reserve(leaves->size());
    for (const auto& l : *leaves) out->emplace_back(l.position, l.weight * s.u(l.position) * std::conj(s.v(l.position)));
    std::lock_guard lock(cache_->mutex);
    auto& slot = cache_->entries[{s.index, depth}];
    if (!slot) slot = std::move(out);
    return slot;
}

cplx WeightedMeasure::transform(cplx lambda) const {
    const bool real_axis = lambda.imag() == 0.0;
    cplx acc(0.0, 0.0);
    for (std::size_t i = 0; i < atom_positions_.size(); ++i) {
        if (real_axis && atom_positions_[i] == lambda.real())
            throw BoundaryEvaluationError("transform evaluated on an atom at " + std::to_string(lambda.real()));
        acc += atom_weights_[i] / (atom_positions_[i] - lambda);
    }
    for (const auto& s : segments_) {
        if (real_axis && (lambda.real() == s.center - s.half || lambda.real() == s.center + s.half))
            throw BoundaryEvaluationError("transform evaluated on an AC breakpoint at " + std::to_string(lambda.real()));
        const cplx z((lambda.real() - s.center) / s.half, lambda.imag() / s.half);
        acc += segment_cauchy(s.local, z);
    }
    const auto& sc = mu_->sc_pieces();
    for (const auto& s : sc_) {
        const ScPiece& piece = sc[s.index];
        double dist = 0.0;
        if (lambda.real() < piece.lo) dist = piece.lo - lambda.real();
        else if (lambda.real() > piece.hi) dist = lambda.real() - piece.hi;
        const double scale = std::max(std::abs(lambda.imag()), dist);
        if (scale == 0.0)
            throw BoundaryEvaluationError("transform evaluated on an sc hull at " + std::to_string(lambda.real()));
        const int depth = piece.depth_for(opt_.sc_resolution_fraction * scale);
        if (depth > piece.max_depth)
            throw PrecisionError("sc piece " + std::to_string(s.index) + " needs refinement depth " +
                                     std::to_string(depth) + " (max " + std::to_string(piece.max_depth) + ")",
                                 depth);
        for (const auto& [x, w] : *weighted_leaves(s, depth)) acc += w / (x - lambda);
    }
    return acc;
}

cplx WeightedMeasure::integrate(const std::function<cplx(double)>& g, double resolution,
                                std::span<const double> extra_breaks, double abs_tol) const {
    cplx acc(0.0, 0.0);
    for (std::size_t i = 0; i < atom_positions_.size(); ++i) acc += atom_weights_[i] * g(atom_positions_[i]);
    quad::Options qopt;
    qopt.rel_tol = 1e-9;
    qopt.abs_tol = abs_tol;
    qopt.max_intervals = 20000;
    for (const auto& s : segments_) {
        auto f = [&](double k) { return g(k) * s.global(cplx(k, 0.0)); };
        acc += quad::integrate<cplx>(f, s.center - s.half, s.center + s.half, extra_breaks, qopt).value;
    }
    const auto& sc = mu_->sc_pieces();
    for (const auto& s : sc_) {
        const ScPiece& piece = sc[s.index];
        const int depth = piece.depth_for(resolution);
        if (depth > piece.max_depth)
            throw PrecisionError("sc piece " + std::to_string(s.index) + " needs refinement depth " +
                                     std::to_string(depth) + " (max " + std::to_string(piece.max_depth) + ")",
                                 depth);
        for (const auto& [x, w] : *weighted_leaves(s, depth)) acc += w * g(x);
    }
    return acc;
}

cplx WeightedMeasure::total() const {
    cplx acc(0.0, 0.0);
    for (const auto& w : atom_weights_) acc += w;
    for (const auto& s : segments_) acc += s.half * integrate_unit(s.local);
    const auto& sc = mu_->sc_pieces();
    for (const auto& s : sc_) {
        const int depth = std::min(sc[s.index].max_depth, 16);
        for (const auto& [x, w] : *weighted_leaves(s, depth)) acc += w;
    }
    return acc;
}

cplx inner_product(const SpectralMeasure& mu, const SymbolVector& u, const SymbolVector& v, int sc_depth) {
    // sc pieces through a fixed depth; everything else exactly
    cplx out(0.0, 0.0);
    const auto& atoms = mu.atoms();
    for (int i = 0; i < static_cast<int>(atoms.size()); ++i) {
        const ComponentRef c{ComponentKind::atom, i};
        if (u.active(c) && v.active(c)) out += atoms[i].weight * u(atoms[i].position) * std::conj(v(atoms[i].position));
    }
    const auto& ac = mu.ac_pieces();
    for (int i = 0; i < static_cast<int>(ac.size()); ++i) {
        const ComponentRef c{ComponentKind::ac, i};
        if (!u.active(c) || !v.active(c)) continue;
        std::vector<double> cuts{ac[i].lo};
        for (double x : u.breakpoints(ac[i].lo, ac[i].hi)) cuts.push_back(x);
        for (double x : v.breakpoints(ac[i].lo, ac[i].hi)) cuts.push_back(x);
        cuts.push_back(ac[i].hi);
        std::sort(cuts.begin(), cuts.end());
        cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
        const Poly rho = Poly::from_real(ac[i].density);
        for (std::size_t j = 0; j + 1 < cuts.size(); ++j)
            out += integrate(rho * u.poly_on(cuts[j], cuts[j + 1]) * v.poly_on(cuts[j], cuts[j + 1]).conjugated(), cuts[j],
                             cuts[j + 1]);
    }
    const auto& sc = mu.sc_pieces();
    for (int i = 0; i < static_cast<int>(sc.size()); ++i) {
        const ComponentRef c{ComponentKind::sc, i};
        if (!u.active(c) || !v.active(c)) continue;
        for (const auto& l : *mu.leaves(i, std::min(sc_depth, sc[i].max_depth)))
            out += l.weight * u(l.position) * std::conj(v(l.position));
    }
    return out;
}

cplx weighted_borel_transform(const SpectralMeasure& mu, const SymbolVector& u, const SymbolVector& v, cplx lambda) {
    return WeightedMeasure(mu, u, v).transform(lambda);
}

cplx borel_transform(const SpectralMeasure& mu, cplx lambda) { return WeightedMeasure(mu).transform(lambda); }

double poisson_imaginary(const SpectralMeasure& mu, const SymbolVector& u, const SymbolVector& v, double x,
                         double eps) {
    if (!(eps > 0.0)) throw std::invalid_argument("poisson_imaginary: eps must be positive");
    return weighted_borel_transform(mu, u, v, cplx(x, eps)).imag();
}

}  // namespace specann
