#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "specann/polynomial.hpp"

namespace specann {

/// Real function given by one polynomial per segment, zero off the segments.
///
/// Segments are sorted and do not overlap; values may jump between segments.
/// Each polynomial is stored in the local variable s in [-1, 1].
class PiecewisePoly {
public:
    struct Segment {
        double lo, hi;
        Poly local;
        double center() const { return 0.5 * (lo + hi); }
        double half() const { return 0.5 * (hi - lo); }
    };

    PiecewisePoly() = default;
    explicit PiecewisePoly(std::vector<Segment> segments);

    /// Linear interpolation of (knots[i], values[i]).
    static PiecewisePoly linear(std::span<const double> knots, std::span<const double> values);
    /// Degree-`degree` interpolation of f at equispaced nodes on each knot interval
    /// (shared endpoint nodes keep the result continuous).
    static PiecewisePoly sample(const std::function<double(double)>& f, std::span<const double> knots, int degree = 3);

    /// Value at x; at a knot the right-hand piece wins. Zero off the segments.
    double operator()(double x) const;
    /// One-sided limits at x.
    double left_limit(double x) const;
    double right_limit(double x) const;

    const std::vector<Segment>& segments() const { return segs_; }
    bool empty() const { return segs_.empty(); }
    std::vector<double> knots() const;
    double sup_abs() const;

    PiecewisePoly operator+(const PiecewisePoly& other) const;  // segments must not overlap
    PiecewisePoly shifted_value(double delta) const;             // adds delta on every segment

private:
    std::vector<Segment> segs_;
    const Segment* find(double x, bool right) const;
};

/// J(lambda) = (1/pi) integral of f(t) (1/(lambda - t) + t/(1 + t^2)) dt for piecewise-polynomial f.
///
/// Evaluated in closed form. Im lambda may be +-0; at a knot where f is
/// continuous the logarithmic terms of the two neighbours cancel exactly.
/// On the boundary from above Im J(x + i0) = -f(x) and Re J(x + i0) is the
/// regularized conjugate function of f.
class RegularizedCauchy {
public:
    RegularizedCauchy() = default;
    explicit RegularizedCauchy(PiecewisePoly f);

    cplx operator()(cplx lambda) const;
    /// Re J(x + i0). Throws BoundaryEvaluationError at a jump of f.
    double conjugate(double x) const;
    const PiecewisePoly& density() const { return f_; }

private:
    PiecewisePoly f_;
    double regularizer_ = 0.0;
};

/// e^{ic} prod_j (lambda - a_j)/(lambda - a_j + i) exp(i J_logmod(lambda)), upper half-plane.
///
/// Boundary modulus is exp(logmod(x)) |x - a_j| / |x - a_j + i|. The phase
/// constant defaults to the value making the function positive at 1000i.
class OuterFunction {
public:
    OuterFunction() = default;
    explicit OuterFunction(PiecewisePoly logmod, std::vector<double> boundary_zeros = {},
                           std::optional<double> phase = {});

    /// Im lambda >= 0; Im lambda = +0 gives the boundary value from above.
    cplx operator()(cplx lambda) const;
    /// conj of the value at conj(lambda), for lambda in the lower half-plane.
    cplx star(cplx lambda) const { return std::conj((*this)(std::conj(lambda))); }

    double phase() const { return phase_; }
    const PiecewisePoly& logmod() const { return j_.density(); }
    const RegularizedCauchy& kernel() const { return j_; }
    const std::vector<double>& boundary_zeros() const { return zeros_; }

private:
    RegularizedCauchy j_;
    std::vector<double> zeros_;
    double phase_ = 0.0;
    cplx unphased(cplx lambda) const;
};

/// Knots for sampling boundary data: uniform on [lo, hi] with `dense` intervals,
/// then geometric tails (ratio `growth`) out to +-`far`. `breaks` are merged in.
struct KnotSpec {
    double lo = -1.0;
    double hi = 1.0;
    int dense = 2048;
    double growth = 1.1;
    double far = 1e7;
    bool left_tail = true;
    bool right_tail = true;
};
std::vector<double> graded_knots(const KnotSpec& spec, std::span<const double> breaks = {});

/// Outer function with boundary log-modulus `logmod`, sampled by cubic pieces on `knots`.
///
/// Throws NumericError when the data do not decay enough for the weighted
/// integral against (1 + t^2)^{-1} to converge.
OuterFunction outer_from_logmod(const std::function<double(double)>& logmod, std::span<const double> knots,
                                std::optional<double> phase = {});

/// (1/pi) PV integral of f(t) (1/(x - t) + t/(1 + t^2)) over [lo, hi], by
/// symmetric pairing around x and adaptive quadrature. `breaks` lists points
/// where f may be non-smooth; x at a jump of f throws BoundaryEvaluationError.
double hilbert_transform(const std::function<double(double)>& f, double lo, double hi, double x,
                         std::span<const double> breaks = {});

/// b(k) = scale_i ((k - a_i)(b_i - k))^shape on each interval of Delta, and its Borel transform.
class HerglotzBump {
public:
    HerglotzBump() = default;
    /// With `peak`, each interval's bump is rescaled to that maximum value.
    HerglotzBump(std::vector<std::pair<double, double>> intervals, int shape, std::optional<double> peak = {});

    double b(double k) const;
    /// Integral of b(k)/(k - lambda) dk; the lower half-plane gives the beta_* branch.
    cplx operator()(cplx lambda) const;
    /// 2 pi i b(k), the strong limit of beta(k + i eps) - beta_*(k - i eps).
    cplx beta0(double k) const { return cplx(0.0, 2.0 * M_PI * b(k)); }
    double max_b() const;

    const std::vector<std::pair<double, double>>& intervals() const { return intervals_; }
    int shape() const { return shape_; }
    /// b as piecewise polynomial.
    const PiecewisePoly& density() const { return density_; }

private:
    std::vector<std::pair<double, double>> intervals_;
    int shape_ = 2;
    PiecewisePoly density_;
};

/// C^1 extension of phi from [x0, inf): equals phi there, a cubic Hermite blend
/// on [x0 - margin, x0] and the constant `target` further left.
class C1Extension {
public:
    /// `target` defaults to phi(x0).
    C1Extension(std::function<double(double)> phi, double x0, double margin, double slope0,
                std::optional<double> target = {});

    double operator()(double x) const;
    double derivative(double x) const;
    /// The blend as a polynomial in the local variable of [x0 - margin, x0].
    Poly blend_local() const;
    double target() const { return target_; }
    double x0() const { return x0_; }
    double margin() const { return margin_; }

private:
    std::function<double(double)> phi_;
    double x0_, margin_, value0_, slope0_, target_;
};

/// Samples of a function on the line Im lambda = eps (or -eps) over a strictly increasing grid.
struct LineTrace {
    double eps = 0.0;
    std::vector<double> grid;
    std::vector<cplx> values;
    /// |f(t)| ~ C |t|^{-s} beyond the grid; absent means the window norm is reported as is.
    std::optional<double> tail_exponent;
};

/// (integral |f|^p)^{1/p} by the trapezoid rule plus the analytic tail
/// |f(T)|^p T/(p s - 1) at each end. Throws PreconditionError if p s <= 1.
double line_norm(const LineTrace& trace, int p);

struct LineGridSpec {
    double margin = 50.0;
    int base_points = 4096;
    double feature_spacing = 0.125;  // times eps
    double feature_halo = 10.0;      // times eps
    double growth = 1.1;
};

/// Grid on [lo - margin, hi + margin]: spacing feature_spacing*eps within
/// feature_halo*eps of each feature interval, growing geometrically away from
/// them up to the uniform base spacing.
std::vector<double> graded_line_grid(double lo, double hi, std::vector<std::pair<double, double>> features, double eps,
                                     const LineGridSpec& spec = {});

}  // namespace specann
