#include "specann/polynomial.hpp"

#include <algorithm>
#include <cmath>

namespace specann {

Poly Poly::from_real(const std::vector<double>& coeffs) {
    Poly p;
    p.c.reserve(coeffs.size());
    for (double v : coeffs) p.c.emplace_back(v, 0.0);
    return p;
}

cplx Poly::operator()(cplx z) const {
    cplx acc(0.0, 0.0);
    for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * z + *it;
    return acc;
}

Poly Poly::derivative() const {
    if (c.size() <= 1) return Poly::constant(0.0);
    std::vector<cplx> d(c.size() - 1);
    for (std::size_t i = 1; i < c.size(); ++i) d[i - 1] = c[i] * static_cast<double>(i);
    return Poly(std::move(d));
}

Poly Poly::conjugated() const {
    Poly p = *this;
    for (auto& v : p.c) v = std::conj(v);
    return p;
}

Poly Poly::rescaled(double center, double half_width) const {
    // Horner in polynomial arithmetic: p(center + h s).
    Poly lin({cplx(center, 0.0), cplx(half_width, 0.0)});
    Poly acc;
    for (auto it = c.rbegin(); it != c.rend(); ++it) {
        acc = acc * lin;
        if (acc.c.empty()) acc.c.push_back(0.0);
        acc.c[0] += *it;
    }
    return acc;
}

Poly operator+(const Poly& a, const Poly& b) {
    Poly r;
    r.c.assign(std::max(a.c.size(), b.c.size()), cplx(0.0, 0.0));
    for (std::size_t i = 0; i < a.c.size(); ++i) r.c[i] += a.c[i];
    for (std::size_t i = 0; i < b.c.size(); ++i) r.c[i] += b.c[i];
    return r;
}

Poly operator*(const Poly& a, const Poly& b) {
    if (a.c.empty() || b.c.empty()) return Poly();
    Poly r;
    r.c.assign(a.c.size() + b.c.size() - 1, cplx(0.0, 0.0));
    for (std::size_t i = 0; i < a.c.size(); ++i)
        for (std::size_t j = 0; j < b.c.size(); ++j) r.c[i + j] += a.c[i] * b.c[j];
    return r;
}

cplx integrate_unit(const Poly& p) {
    cplx acc(0.0, 0.0);
    for (std::size_t j = 0; j < p.c.size(); j += 2) acc += p.c[j] * (2.0 / static_cast<double>(j + 1));
    return acc;
}

cplx integrate(const Poly& p, double a, double b) {
    const double mid = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    return h * integrate_unit(p.rescaled(mid, h));
}

cplx segment_cauchy(const Poly& q, cplx z) {
    if (q.c.empty()) return cplx(0.0, 0.0);
    constexpr double near_radius = 2.0;
    if (std::abs(z) <= near_radius) {
        // q(s) = (s - z) Q(s) + q(z)
        const std::size_t n = q.c.size();
        std::vector<cplx> quot(n > 1 ? n - 1 : 0);
        cplx carry(0.0, 0.0);
        for (std::size_t k = n; k-- > 0;) {
            const cplx next = q.c[k] + carry * z;
            if (k > 0) quot[k - 1] = next;
            carry = next;
        }
        const cplx rem = carry;
        // explicit negation keeps the sign of a zero imaginary part
        const cplx log_ratio =
            std::log(cplx(1.0 - z.real(), -z.imag())) - std::log(cplx(-1.0 - z.real(), -z.imag()));
        return integrate_unit(Poly(std::move(quot))) + rem * log_ratio;
    }
    // 1/(s - z) = -sum_m s^m / z^{m+1}
    double coeff_mag = 0.0;
    for (const auto& v : q.c) coeff_mag += std::abs(v);
    const cplx inv_z = 1.0 / z;
    const double inv_abs = std::abs(inv_z);
    cplx power = inv_z;
    double power_abs = inv_abs;
    cplx sum(0.0, 0.0);
    for (int m = 0; m < 2000; ++m) {
        cplx moment(0.0, 0.0);
        for (std::size_t j = (m % 2 == 0) ? 0 : 1; j < q.c.size(); j += 2)
            moment += q.c[j] * (2.0 / static_cast<double>(m + j + 1));
        // parity: s^{m+j} integrates to zero when m + j is odd
        sum -= moment * power;
        const double bound = 2.0 * coeff_mag * power_abs;
        if (m > q.degree() + 1 && bound < 1e-18 * std::max(std::abs(sum), 1e-30 * coeff_mag)) break;
        if (bound == 0.0) break;
        power *= inv_z;
        power_abs *= inv_abs;
    }
    return sum;
}

}  // namespace specann
