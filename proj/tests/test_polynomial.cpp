#include <cmath>
#include <random>

#include "doctest.h"
#include "specann/polynomial.hpp"
#include "specann/quadrature.hpp"

using namespace specann;

TEST_CASE("rescaled polynomial agrees with the original after the affine change") {
    Poly p({cplx(1.0, 2.0), cplx(-0.5, 0.0), cplx(0.25, -1.0), cplx(3.0, 0.0)});
    Poly q = p.rescaled(0.7, 1.3);
    for (double s : {-1.0, -0.3, 0.0, 0.55, 1.0}) CHECK(std::abs(q(s) - p(0.7 + 1.3 * s)) < 1e-12);
}

TEST_CASE("exact integration matches Gauss-Kronrod") {
    Poly p = Poly::from_real({1.0, -2.0, 0.5, 4.0});
    auto f = [&](double k) { return p.real_at(k); };
    const auto r = quad::integrate<double>(f, -0.4, 2.1);
    CHECK(std::abs(integrate(p, -0.4, 2.1).real() - r.value) < 1e-12);
}

TEST_CASE("segment Cauchy integral matches quadrature on both branches") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> coef(-2.0, 2.0);
    std::uniform_real_distribution<double> re(-6.0, 6.0);
    std::uniform_real_distribution<double> im(0.05, 4.0);
    for (int trial = 0; trial < 200; ++trial) {
        Poly q({cplx(coef(rng), coef(rng)), cplx(coef(rng), 0.0), cplx(coef(rng), coef(rng))});
        const cplx z(re(rng), (trial % 2 ? 1.0 : -1.0) * im(rng));
        auto f = [&](double s) { return q(s) / (s - z); };
        const auto ref = quad::integrate<cplx>(f, -1.0, 1.0, {}, {.abs_tol = 1e-14, .rel_tol = 1e-12});
        CHECK(std::abs(segment_cauchy(q, z) - ref.value) < 1e-9 * std::max(1.0, std::abs(ref.value)));
    }
}

TEST_CASE("boundary value from above on the segment carries +i pi") {
    const double x = 0.3;
    const cplx v = segment_cauchy(Poly::constant(1.0), cplx(x, 0.0));
    CHECK(std::abs(v.real() - std::log((1 - x) / (1 + x))) < 1e-14);
    CHECK(std::abs(v.imag() - M_PI) < 1e-14);
    const cplx below = segment_cauchy(Poly::constant(1.0), cplx(x, -0.0));
    CHECK(std::abs(below.imag() + M_PI) < 1e-14);
}

TEST_CASE("far-field series is accurate for large arguments") {
    Poly q = Poly::from_real({0.0, 0.0, 0.0, 0.0, 1.0});  // s^4
    const cplx z(1e5, 3.0);
    // -sum_m M_{m+4} / z^{m+1}, M_n = 2/(n+1) for even n
    cplx expect = 0.0;
    for (int m = 0; m < 20; m += 2) expect -= (2.0 / (m + 5)) / std::pow(z, m + 1);
    CHECK(std::abs(segment_cauchy(q, z) - expect) < 1e-20);
}
