#include "specann/hardy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "specann/errors.hpp"
#include "specann/quadrature.hpp"

namespace specann {

namespace {

// Monomial coefficients (in s) of the polynomial through (nodes[j], values[j]).
Poly interpolate(const std::vector<double>& nodes, const std::vector<double>& values) {
    const std::size_t n = nodes.size();
    std::vector<double> dd(values);
    for (std::size_t level = 1; level < n; ++level)
        for (std::size_t j = n - 1; j >= level; --j) dd[j] = (dd[j] - dd[j - 1]) / (nodes[j] - nodes[j - level]);
    // Horner on the Newton form
    std::vector<double> coeffs{dd[n - 1]};
    for (std::size_t j = n - 1; j-- > 0;) {
        std::vector<double> next(coeffs.size() + 1, 0.0);
        for (std::size_t k = 0; k < coeffs.size(); ++k) {
            next[k + 1] += coeffs[k];
            next[k] -= nodes[j] * coeffs[k];
        }
        next[0] += dd[j];
        coeffs = std::move(next);
    }
    return Poly::from_real(coeffs);
}

std::vector<double> equispaced_nodes(int degree) {
    std::vector<double> s(static_cast<std::size_t>(degree) + 1);
    for (int j = 0; j <= degree; ++j) s[static_cast<std::size_t>(j)] = -1.0 + 2.0 * j / degree;
    return s;
}

// Integral of q(s)/(s - z) over [-1, 1]; for z = +-1 on the real axis the
// divergent log|x - knot| is dropped (finite part in the global variable with
// half-width h), leaving the half residue i pi q(z)/2 on the side picked by
// the sign of Im z.
cplx cauchy_with_endpoints(const Poly& q, cplx lambda, double lo, double hi) {
    const double c = 0.5 * (lo + hi), h = 0.5 * (hi - lo);
    const cplx z((lambda.real() - c) / h, lambda.imag() / h);
    // knots are detected in the global variable; (x - c)/h need not round to +-1
    if (z.imag() != 0.0 || (lambda.real() != lo && lambda.real() != hi)) return segment_cauchy(q, z);
    const double zr = lambda.real() == hi ? 1.0 : -1.0;
    const std::size_t n = q.c.size();
    if (n == 0) return 0.0;
    std::vector<cplx> quot(n > 1 ? n - 1 : 0);
    cplx carry = 0.0;
    for (std::size_t k = n; k-- > 0;) {
        const cplx next = q.c[k] + carry * zr;
        if (k > 0) quot[k - 1] = next;
        carry = next;
    }
    const double side = std::signbit(z.imag()) ? -1.0 : 1.0;
    const double re = zr > 0 ? -std::log(h) - std::log(2.0) : std::log(2.0) + std::log(h);
    return integrate_unit(Poly(std::move(quot))) + carry * cplx(re, side * M_PI / 2.0);
}

void require_sorted_disjoint(const std::vector<PiecewisePoly::Segment>& segs) {
    for (std::size_t i = 0; i < segs.size(); ++i) {
        if (!(segs[i].lo < segs[i].hi) || !std::isfinite(segs[i].lo) || !std::isfinite(segs[i].hi))
            throw std::invalid_argument("piecewise polynomial segment must be a finite interval with lo < hi");
        if (i > 0 && segs[i].lo < segs[i - 1].hi)
            throw std::invalid_argument("piecewise polynomial segments overlap or are unsorted");
    }
}

}  // namespace

// ---------------------------------------------------------------- PiecewisePoly

PiecewisePoly::PiecewisePoly(std::vector<Segment> segments) : segs_(std::move(segments)) {
    require_sorted_disjoint(segs_);
}

PiecewisePoly PiecewisePoly::linear(std::span<const double> knots, std::span<const double> values) {
    if (knots.size() != values.size() || knots.size() < 2)
        throw std::invalid_argument("linear interpolation needs matching knots and values (at least two)");
    std::vector<Segment> segs;
    segs.reserve(knots.size() - 1);
    for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
        const double a = 0.5 * (values[i] + values[i + 1]);
        const double b = 0.5 * (values[i + 1] - values[i]);
        segs.push_back({knots[i], knots[i + 1], Poly::from_real({a, b})});
    }
    return PiecewisePoly(std::move(segs));
}

PiecewisePoly PiecewisePoly::sample(const std::function<double(double)>& f, std::span<const double> knots, int degree) {
    if (degree < 1) throw std::invalid_argument("sampling degree must be at least 1");
    if (knots.size() < 2) throw std::invalid_argument("sampling needs at least two knots");
    const std::vector<double> nodes = equispaced_nodes(degree);
    std::vector<Segment> segs;
    segs.reserve(knots.size() - 1);
    double left = f(knots[0]);
    std::vector<double> vals(nodes.size());
    for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
        const double lo = knots[i], hi = knots[i + 1];
        const double c = 0.5 * (lo + hi), h = 0.5 * (hi - lo);
        vals.front() = left;
        for (std::size_t j = 1; j + 1 < nodes.size(); ++j) vals[j] = f(c + h * nodes[j]);
        vals.back() = f(hi);
        left = vals.back();
        segs.push_back({lo, hi, interpolate(nodes, vals)});
    }
    return PiecewisePoly(std::move(segs));
}

const PiecewisePoly::Segment* PiecewisePoly::find(double x, bool right) const {
    // first segment with hi > x (right) or hi >= x (left)
    auto it = right ? std::upper_bound(segs_.begin(), segs_.end(), x, [](double v, const Segment& s) { return v < s.hi; })
                    : std::lower_bound(segs_.begin(), segs_.end(), x, [](const Segment& s, double v) { return s.hi < v; });
    if (it == segs_.end()) return nullptr;
    if (right ? (it->lo <= x) : (it->lo < x)) return &*it;
    return nullptr;
}

double PiecewisePoly::left_limit(double x) const {
    const Segment* s = find(x, false);
    return s ? s->local.real_at((x - s->center()) / s->half()) : 0.0;
}

double PiecewisePoly::right_limit(double x) const {
    const Segment* s = find(x, true);
    return s ? s->local.real_at((x - s->center()) / s->half()) : 0.0;
}

double PiecewisePoly::operator()(double x) const {
    if (const Segment* s = find(x, true)) return s->local.real_at((x - s->center()) / s->half());
    return left_limit(x);
}

std::vector<double> PiecewisePoly::knots() const {
    std::vector<double> out;
    for (const auto& s : segs_) {
        if (out.empty() || out.back() != s.lo) out.push_back(s.lo);
        out.push_back(s.hi);
    }
    return out;
}

double PiecewisePoly::sup_abs() const {
    double m = 0.0;
    for (const auto& s : segs_)
        for (int j = 0; j <= 32; ++j) m = std::max(m, std::abs(s.local.real_at(-1.0 + j / 16.0)));
    return m;
}

PiecewisePoly PiecewisePoly::operator+(const PiecewisePoly& other) const {
    std::vector<Segment> all(segs_);
    all.insert(all.end(), other.segs_.begin(), other.segs_.end());
    std::sort(all.begin(), all.end(), [](const Segment& a, const Segment& b) { return a.lo < b.lo; });
    return PiecewisePoly(std::move(all));
}

PiecewisePoly PiecewisePoly::shifted_value(double delta) const {
    std::vector<Segment> out(segs_);
    for (auto& s : out) s.local = s.local + Poly::constant(delta);
    return PiecewisePoly(std::move(out));
}

// ---------------------------------------------------------------- RegularizedCauchy

RegularizedCauchy::RegularizedCauchy(PiecewisePoly f) : f_(std::move(f)) {
    // t/(1+t^2) = Re 1/(t - i)
    double acc = 0.0;
    for (const auto& s : f_.segments())
        acc += segment_cauchy(s.local, cplx(-s.center() / s.half(), 1.0 / s.half())).real();
    regularizer_ = acc / M_PI;
}

cplx RegularizedCauchy::operator()(cplx lambda) const {
    const auto& segs = f_.segments();
    if (segs.empty()) return 0.0;
    if (lambda.imag() == 0.0) {
        const double x = lambda.real();
        const double l = f_.left_limit(x), r = f_.right_limit(x);
        if (std::abs(l - r) > 1e-9 * std::max({1.0, std::abs(l), std::abs(r)}))
            throw BoundaryEvaluationError("boundary value requested at a jump of the density at " + std::to_string(x));
    }
    cplx acc = 0.0;
    for (const auto& s : segs) {
        acc -= cauchy_with_endpoints(s.local, lambda, s.lo, s.hi);
    }
    return acc / M_PI + regularizer_;
}

double RegularizedCauchy::conjugate(double x) const { return (*this)(cplx(x, 0.0)).real(); }

// ---------------------------------------------------------------- OuterFunction

OuterFunction::OuterFunction(PiecewisePoly logmod, std::vector<double> boundary_zeros, std::optional<double> phase)
    : j_(std::move(logmod)), zeros_(std::move(boundary_zeros)) {
    if (phase) {
        phase_ = *phase;
    } else {
        phase_ = -std::arg(unphased(cplx(0.0, 1e3)));
    }
}

cplx OuterFunction::unphased(cplx lambda) const {
    cplx v = std::exp(cplx(0.0, 1.0) * j_(lambda));
    for (double a : zeros_) v *= (lambda - a) / (lambda - a + cplx(0.0, 1.0));
    return v;
}

cplx OuterFunction::operator()(cplx lambda) const {
    if (std::signbit(lambda.imag())) throw std::domain_error("outer function is evaluated in the closed upper half-plane");
    return std::polar(1.0, phase_) * unphased(lambda);
}

std::vector<double> graded_knots(const KnotSpec& spec, std::span<const double> breaks) {
    if (!(spec.lo < spec.hi) || spec.dense < 1 || !(spec.growth > 1.0))
        throw std::invalid_argument("knot spec needs lo < hi, dense >= 1 and growth > 1");
    const double h = (spec.hi - spec.lo) / spec.dense;
    std::vector<double> k;
    for (int i = 0; i <= spec.dense; ++i) k.push_back(spec.lo + h * i);
    k.back() = spec.hi;
    if (spec.right_tail) {
        double x = spec.hi, step = h;
        while (x < spec.far) {
            step *= spec.growth;
            x = std::min(x + step, spec.far);
            k.push_back(x);
        }
    }
    if (spec.left_tail) {
        double x = spec.lo, step = h;
        while (x > -spec.far) {
            step *= spec.growth;
            x = std::max(x - step, -spec.far);
            k.push_back(x);
        }
    }
    std::sort(k.begin(), k.end());
    // merge breaks, dropping grid points that crowd them
    std::vector<double> b;
    for (double x : breaks)
        if (x >= k.front() && x <= k.back()) b.push_back(x);
    std::sort(b.begin(), b.end());
    std::vector<double> out;
    out.reserve(k.size() + b.size());
    for (std::size_t i = 0; i < k.size(); ++i) {
        if (i > 0 && i + 1 < k.size() && !b.empty()) {
            const double gap = std::min(k[i] - k[i - 1], k[i + 1] - k[i]);
            auto it = std::lower_bound(b.begin(), b.end(), k[i]);
            double dist = std::numeric_limits<double>::infinity();
            if (it != b.end()) dist = *it - k[i];
            if (it != b.begin()) dist = std::min(dist, k[i] - *(it - 1));
            if (dist > 0.0 && dist < 0.25 * gap) continue;
        }
        out.push_back(k[i]);
    }
    out.insert(out.end(), b.begin(), b.end());
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

OuterFunction outer_from_logmod(const std::function<double(double)>& logmod, std::span<const double> knots,
                                std::optional<double> phase) {
    PiecewisePoly pp = PiecewisePoly::sample(logmod, knots, 3);
    for (const auto& s : pp.segments())
        for (const auto& c : s.local.c)
            if (!std::isfinite(c.real())) throw NumericError("log-modulus sample is not finite");
    for (double t : {knots.front(), knots.back()}) {
        const double tail = std::abs(logmod(t)) / std::max(1.0, std::abs(t));
        if (tail > 1e-3)
            throw NumericError("log-modulus is not integrable against (1+t^2)^{-1}: |logmod(T)|/|T| = " +
                               std::to_string(tail) + " at T = " + std::to_string(t));
    }
    return OuterFunction(std::move(pp), {}, phase);
}

double hilbert_transform(const std::function<double(double)>& f, double lo, double hi, double x,
                         std::span<const double> breaks) {
    quad::Options opt;
    opt.abs_tol = 1e-13;
    opt.rel_tol = 1e-11;
    opt.max_intervals = 20000;
    for (double b : breaks)
        if (b == x) {
            const double tau = 1e-9 * (1.0 + std::abs(x));
            const double l = f(x - tau), r = f(x + tau);
            if (std::abs(l - r) > 1e-6 * (1.0 + std::abs(l) + std::abs(r)))
                throw BoundaryEvaluationError("conjugate function requested at a jump at " + std::to_string(x));
        }
    auto reg = [&](double t) { return f(t) * t / (1.0 + t * t); };
    std::vector<double> bk(breaks.begin(), breaks.end());
    double total = quad::integrate<double>(reg, lo, hi, bk, opt).value;
    auto direct = [&](double t) { return f(t) / (x - t); };
    if (x <= lo || x >= hi) {
        total += quad::integrate<double>(direct, lo, hi, bk, opt).value;
        return total / M_PI;
    }
    const double d = std::min(x - lo, hi - x);
    std::vector<double> ub;
    for (double b : breaks)
        if (std::abs(b - x) < d && b != x) ub.push_back(std::abs(b - x));
    std::sort(ub.begin(), ub.end());
    auto paired = [&](double u) { return (f(x - u) - f(x + u)) / u; };
    total += quad::integrate<double>(paired, 0.0, d, ub, opt).value;
    if (x - d > lo) total += quad::integrate<double>(direct, lo, x - d, bk, opt).value;
    if (x + d < hi) total += quad::integrate<double>(direct, x + d, hi, bk, opt).value;
    return total / M_PI;
}

// ---------------------------------------------------------------- HerglotzBump

HerglotzBump::HerglotzBump(std::vector<std::pair<double, double>> intervals, int shape, std::optional<double> peak)
    : intervals_(std::move(intervals)), shape_(shape) {
    if (intervals_.empty()) throw PreconditionError("bump support must contain at least one interval");
    if (shape_ < 2) throw PreconditionError("bump exponent must be at least 2 for a C^1 bump");
    std::sort(intervals_.begin(), intervals_.end());
    std::vector<PiecewisePoly::Segment> segs;
    for (const auto& [a, b] : intervals_) {
        if (!(a < b) || !std::isfinite(a) || !std::isfinite(b))
            throw PreconditionError("bump interval must be bounded with lo < hi");
        const double h = 0.5 * (b - a);
        const double scale = peak ? *peak : std::pow(h, 2 * shape_);
        // ((k-a)(b-k))^shape = h^{2 shape} (1 - s^2)^shape
        Poly base = Poly::from_real({1.0, 0.0, -1.0});
        Poly p = Poly::constant(scale);
        for (int i = 0; i < shape_; ++i) p = p * base;
        segs.push_back({a, b, p});
    }
    density_ = PiecewisePoly(std::move(segs));
}

double HerglotzBump::b(double k) const { return density_(k); }

cplx HerglotzBump::operator()(cplx lambda) const {
    cplx acc = 0.0;
    for (const auto& s : density_.segments()) {
        acc += cauchy_with_endpoints(s.local, lambda, s.lo, s.hi);
    }
    return acc;
}

double HerglotzBump::max_b() const {
    double m = 0.0;
    for (const auto& s : density_.segments()) m = std::max(m, s.local.real_at(0.0));
    return m;
}

// ---------------------------------------------------------------- C1Extension

C1Extension::C1Extension(std::function<double(double)> phi, double x0, double margin, double slope0,
                         std::optional<double> target)
    : phi_(std::move(phi)), x0_(x0), margin_(margin), slope0_(slope0) {
    if (!(margin_ > 0.0)) throw std::invalid_argument("extension margin must be positive");
    value0_ = phi_(x0_);
    target_ = target ? *target : value0_;
}

double C1Extension::operator()(double x) const {
    if (x >= x0_) return phi_(x);
    if (x <= x0_ - margin_) return target_;
    const double t = (x - (x0_ - margin_)) / margin_;
    const double h00 = 2 * t * t * t - 3 * t * t + 1, h01 = -2 * t * t * t + 3 * t * t, h11 = t * t * t - t * t;
    return target_ * h00 + value0_ * h01 + slope0_ * margin_ * h11;
}

double C1Extension::derivative(double x) const {
    if (x > x0_) {
        const double h = 1e-6 * (1.0 + std::abs(x));
        return (phi_(x + h) - phi_(x - std::min(h, x - x0_))) / (h + std::min(h, x - x0_));
    }
    if (x == x0_) return slope0_;
    if (x <= x0_ - margin_) return 0.0;
    const double t = (x - (x0_ - margin_)) / margin_;
    const double d00 = 6 * t * t - 6 * t, d01 = -6 * t * t + 6 * t, d11 = 3 * t * t - 2 * t;
    return (target_ * d00 + value0_ * d01) / margin_ + slope0_ * d11;
}

Poly C1Extension::blend_local() const {
    const std::vector<double> nodes = equispaced_nodes(3);
    std::vector<double> vals;
    for (double s : nodes) {
        const double t = 0.5 * (s + 1.0);
        const double h00 = 2 * t * t * t - 3 * t * t + 1, h01 = -2 * t * t * t + 3 * t * t, h11 = t * t * t - t * t;
        vals.push_back(target_ * h00 + value0_ * h01 + slope0_ * margin_ * h11);
    }
    return interpolate(nodes, vals);
}

// ---------------------------------------------------------------- line norms

double line_norm(const LineTrace& trace, int p) {
    if (p < 1) throw std::invalid_argument("line norm exponent must be at least 1");
    const auto& g = trace.grid;
    if (g.size() != trace.values.size() || g.size() < 2)
        throw std::invalid_argument("line trace needs matching grid and values (at least two samples)");
    if (trace.tail_exponent && !(p * *trace.tail_exponent > 1.0))
        throw PreconditionError("tail exponent " + std::to_string(*trace.tail_exponent) +
                                " is too slow for an L^" + std::to_string(p) + " norm");
    auto pw = [p](cplx v) { return p == 1 ? std::abs(v) : std::pow(std::abs(v), p); };
    double acc = 0.0;
    double prev = pw(trace.values[0]);
    for (std::size_t i = 1; i < g.size(); ++i) {
        if (!(g[i] > g[i - 1])) throw std::invalid_argument("line trace grid must be strictly increasing");
        const double cur = pw(trace.values[i]);
        acc += 0.5 * (prev + cur) * (g[i] - g[i - 1]);
        prev = cur;
    }
    if (trace.tail_exponent) {
        const double ps = p * *trace.tail_exponent;
        acc += pw(trace.values.front()) * std::abs(g.front()) / (ps - 1.0);
        acc += pw(trace.values.back()) * std::abs(g.back()) / (ps - 1.0);
    }
    return p == 1 ? acc : std::pow(acc, 1.0 / p);
}

std::vector<double> graded_line_grid(double lo, double hi, std::vector<std::pair<double, double>> features, double eps,
                                     const LineGridSpec& spec) {
    if (!(eps > 0.0)) throw std::invalid_argument("line grid needs eps > 0");
    const double t_lo = lo - spec.margin, t_hi = hi + spec.margin;
    const double base_h = (t_hi - t_lo) / spec.base_points;
    const double fine_h = std::min(base_h, spec.feature_spacing * eps);
    const double halo = spec.feature_halo * eps;
    for (auto& f : features) {
        f.first = std::max(t_lo, f.first - halo);
        f.second = std::min(t_hi, f.second + halo);
    }
    std::sort(features.begin(), features.end());
    std::vector<std::pair<double, double>> merged;
    for (const auto& f : features) {
        if (f.first > f.second) continue;
        if (!merged.empty() && f.first <= merged.back().second) merged.back().second = std::max(merged.back().second, f.second);
        else merged.push_back(f);
    }
    std::vector<double> grid{t_lo};
    std::size_t next = 0;  // first merged interval with hi > x
    double x = t_lo;
    constexpr std::size_t max_points = 20'000'000;
    while (x < t_hi) {
        while (next < merged.size() && merged[next].second <= x) ++next;
        double step;
        double limit = t_hi;
        if (next < merged.size() && merged[next].first <= x) {
            step = fine_h;
            limit = std::min(limit, merged[next].second);
        } else {
            double d = next < merged.size() ? merged[next].first - x : t_hi - x;
            if (next > 0) d = std::min(d, x - merged[next - 1].second);
            step = std::min(base_h, fine_h + (spec.growth - 1.0) * d);
            if (next < merged.size()) limit = merged[next].first;
        }
        x = (x + step >= limit - 1e-3 * step) ? limit : x + step;
        grid.push_back(x);
        if (grid.size() > max_points) throw NumericError("line grid exceeds the point budget; raise eps");
    }
    return grid;
}

}  // namespace specann
