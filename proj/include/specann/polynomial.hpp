#pragma once

#include <complex>
#include <vector>

namespace specann {

using cplx = std::complex<double>;

/// Dense polynomial with complex coefficients, lowest degree first.
struct Poly {
    std::vector<cplx> c;

    Poly() = default;
    explicit Poly(std::vector<cplx> coeffs) : c(std::move(coeffs)) {}
    static Poly constant(cplx v) { return Poly({v}); }
    static Poly from_real(const std::vector<double>& coeffs);

    int degree() const { return static_cast<int>(c.size()) - 1; }
    bool empty() const { return c.empty(); }

    cplx operator()(cplx z) const;
    double real_at(double x) const { return (*this)(cplx(x, 0.0)).real(); }

    Poly derivative() const;
    /// Coefficients conjugated, so that conj(p(x)) == p.conjugated()(x) on the real line.
    Poly conjugated() const;
    /// Coefficients of s -> p(center + half_width * s).
    Poly rescaled(double center, double half_width) const;

    friend Poly operator+(const Poly& a, const Poly& b);
    friend Poly operator*(const Poly& a, const Poly& b);
};

/// Exact integral of p over [-1, 1].
cplx integrate_unit(const Poly& p);

/// Exact integral of p over [a, b].
cplx integrate(const Poly& p, double a, double b);

/// Cauchy integral over the reference segment: the integral of q(s) / (s - z) for s in [-1, 1].
///
/// Near the segment the value is assembled from synthetic division and the
/// logarithm log(1 - z) - log(-1 - z); signed zeros in Im z select the
/// boundary side when z is real and inside the segment. Away from the
/// segment the moment series in 1/z is summed, which avoids the
/// cancellation of the division route for large |z|.
cplx segment_cauchy(const Poly& q, cplx z);

}  // namespace specann
