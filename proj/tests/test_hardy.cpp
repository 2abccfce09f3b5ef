#include <cmath>
#include <random>

#include "doctest.h"
#include "specann/errors.hpp"
#include "specann/hardy.hpp"
#include "specann/quadrature.hpp"

using namespace specann;

namespace {

const cplx I(0.0, 1.0);

// 1/(lambda+i)/(lambda+2i) test function and its boundary log-modulus
cplx ratio_fn(cplx l) { return (l + I) / (l + 2.0 * I); }
double ratio_logmod(double t) { return 0.5 * std::log((t * t + 1.0) / (t * t + 4.0)); }

std::vector<double> ratio_knots() {
    KnotSpec ks;
    ks.lo = -20.0;
    ks.hi = 20.0;
    ks.dense = 2000;
    ks.growth = 1.05;
    return graded_knots(ks);
}

double unwrap_diff(double a, double b) { return std::remainder(a - b, 2.0 * M_PI); }

}  // namespace

TEST_CASE("piecewise polynomial sampling and limits") {
    auto cubic = [](double x) { return 1.0 - 2.0 * x + 0.5 * x * x * x; };
    std::vector<double> knots{-1.0, 0.0, 0.7, 2.0};
    PiecewisePoly pp = PiecewisePoly::sample(cubic, knots, 3);
    for (double x : {-0.9, -0.2, 0.0, 0.33, 1.5, 2.0}) CHECK(std::abs(pp(x) - cubic(x)) < 1e-13);
    CHECK(pp(2.5) == 0.0);
    CHECK(pp.left_limit(-1.0) == 0.0);
    CHECK(std::abs(pp.right_limit(-1.0) - cubic(-1.0)) < 1e-14);
    std::vector<double> k{0.0, 1.0}, v{2.0, 4.0};
    PiecewisePoly lin = PiecewisePoly::linear(k, v);
    CHECK(std::abs(lin(0.25) - 2.5) < 1e-15);
    CHECK(lin.knots() == std::vector<double>{0.0, 1.0});
    CHECK_THROWS(PiecewisePoly({{0.0, 1.0, Poly::constant(1.0)}, {0.5, 2.0, Poly::constant(1.0)}}));
}

TEST_CASE("regularized Cauchy integral matches quadrature off the axis") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> val(-1.0, 1.0);
    std::vector<double> knots{-2.0, -1.1, -0.3, 0.4, 1.0, 2.5};
    std::vector<double> vals;
    for (std::size_t i = 0; i < knots.size(); ++i) vals.push_back(val(rng));
    PiecewisePoly f = PiecewisePoly::linear(knots, vals);
    RegularizedCauchy j(f);
    for (cplx lam : {cplx(0.1, 0.3), cplx(-1.1, 0.02), cplx(5.0, 1.0), cplx(0.0, 50.0), cplx(0.2, -0.4)}) {
        auto g = [&](double t) { return f(t) * (1.0 / (lam - t) + t / (1.0 + t * t)); };
        const auto ref = quad::integrate<cplx>(g, -2.0, 2.5, std::vector<double>(knots.begin(), knots.end()),
                                               {.abs_tol = 1e-14, .rel_tol = 1e-12, .max_intervals = 50000});
        CHECK(std::abs(j(lam) - ref.value / M_PI) < 1e-10);
    }
}

TEST_CASE("boundary values from above: imaginary part is minus the density") {
    std::vector<double> knots{-1.0, 0.0, 0.5, 1.0}, vals{0.0, 1.0, 0.25, 0.0};
    PiecewisePoly f = PiecewisePoly::linear(knots, vals);
    RegularizedCauchy j(f);
    for (double x : {-0.5, 0.0, 0.25, 0.5, 0.9}) {
        const cplx b = j(cplx(x, 0.0));
        CHECK(std::abs(b.imag() + f(x)) < 1e-13);
        // the real part is the limit of nearby interior samples
        const cplx near = j(cplx(x, 1e-9));
        CHECK(std::abs(b.real() - near.real()) < 1e-6);
    }
    CHECK(std::abs(j(cplx(0.25, -0.0)).imag() - f(0.25)) < 1e-13);
    // a jump has no finite conjugate
    PiecewisePoly step = PiecewisePoly::linear(std::vector<double>{-1.0, 1.0}, std::vector<double>{1.0, 1.0});
    CHECK_THROWS_AS(RegularizedCauchy(step).conjugate(1.0), BoundaryEvaluationError);
}

TEST_CASE("conjugate of the indicator of [-1,1]") {
    PiecewisePoly chi = PiecewisePoly::linear(std::vector<double>{-1.0, 1.0}, std::vector<double>{1.0, 1.0});
    const double expect = std::log(3.0) / M_PI;
    CHECK(std::abs(RegularizedCauchy(chi).conjugate(2.0) - expect) < 1e-13);
    auto f = [](double t) { return std::abs(t) <= 1.0 ? 1.0 : 0.0; };
    CHECK(std::abs(hilbert_transform(f, -1.0, 1.0, 2.0) - expect) < 1e-4);
    CHECK(std::abs(hilbert_transform(f, -1.0, 1.0, 2.0) - expect) < 1e-10);
    CHECK(hilbert_transform([](double) { return 0.0; }, -1.0, 1.0, 0.3) == 0.0);
    CHECK_THROWS_AS(hilbert_transform(f, -2.0, 2.0, 1.0, std::vector<double>{-1.0, 1.0}), BoundaryEvaluationError);
}

TEST_CASE("PV quadrature agrees with the closed form on a smooth bump") {
    auto bump = [](double t) { return std::abs(t) < 1.0 ? (1 - t * t) * (1 - t * t) * (1.0 + 0.3 * t) : 0.0; };
    PiecewisePoly pp = PiecewisePoly::sample(bump, std::vector<double>{-1.0, 1.0}, 5);
    RegularizedCauchy j(pp);
    for (double x : {-1.5, -0.7, 0.0, 0.31, 0.99, 3.0}) CHECK(std::abs(hilbert_transform(bump, -1.0, 1.0, x) - j.conjugate(x)) < 1e-9);
    // even data: the PV part is odd and the regularizer vanishes
    auto even = [](double t) { return std::abs(t) < 1.0 ? (1 - t * t) * (1 - t * t) : 0.0; };
    for (double x : {0.2, 0.8, 1.7})
        CHECK(std::abs(hilbert_transform(even, -1.0, 1.0, x) + hilbert_transform(even, -1.0, 1.0, -x)) < 1e-10);
}

TEST_CASE("outer reconstruction round trip") {
    const auto knots = ratio_knots();
    OuterFunction o = outer_from_logmod(ratio_logmod, knots);
    CHECK(std::abs(std::abs(o(I)) - 2.0 / 3.0) < 1e-6);
    // the positive normalization at 1000i fixes the unimodular constant
    const cplx unit = ratio_fn(cplx(0, 1e3)) / std::abs(ratio_fn(cplx(0, 1e3)));
    for (int k = 0; k < 20; ++k) {
        const cplx lam(-3.0 + 0.31 * k, 0.05 + 0.2 * (k % 7));
        const cplx expect = ratio_fn(lam) / unit;
        CHECK(std::abs(o(lam) - expect) < 1e-6 * std::abs(expect));
    }
    CHECK(std::abs(std::abs(o(cplx(0, 1e4))) - 1.0) < 1e-3);
    OuterFunction one = outer_from_logmod([](double) { return 0.0; }, knots);
    CHECK(std::abs(one(cplx(0.3, 0.2)) - 1.0) < 1e-15);
    CHECK_THROWS_AS(outer_from_logmod([](double t) { return t; }, knots), NumericError);
}

TEST_CASE("phase and modulus consistency on the boundary") {
    const auto knots = ratio_knots();
    OuterFunction o = outer_from_logmod(ratio_logmod, knots);
    std::vector<double> breaks{-100.0, -10.0, -1.0, 1.0, 10.0, 100.0};
    double worst = 0.0, worst_mod = 0.0;
    for (int k = 0; k < 100; ++k) {
        const double x = -5.0 + 0.1 * k + 0.013;
        const cplx v = o(cplx(x, 1e-7));
        const double h = hilbert_transform(ratio_logmod, -1e4, 1e4, x, breaks);
        worst = std::max(worst, std::abs(unwrap_diff(std::arg(v) - o.phase(), h)));
        worst_mod = std::max(worst_mod, std::abs(std::log(std::abs(v)) - ratio_logmod(x)));
    }
    CHECK(worst < 1e-3);
    CHECK(worst_mod < 1e-5);
}

TEST_CASE("boundary zeros of an outer function") {
    OuterFunction o(PiecewisePoly{}, {0.5});
    for (double eps : {1e-2, 1e-4, 1e-6}) CHECK(std::abs(std::abs(o(cplx(0.5, eps))) - eps / (1.0 + eps)) < 1e-15);
    CHECK(std::abs(o(cplx(0.5, 0.0))) == 0.0);
    CHECK(std::abs(o.star(cplx(0.2, -0.3)) - std::conj(o(cplx(0.2, 0.3)))) == 0.0);
}

TEST_CASE("Herglotz bump") {
    HerglotzBump beta({{-1.0, 1.0}}, 2);
    CHECK(beta.b(0.0) == doctest::Approx(1.0));
    CHECK(beta.b(1.0) == 0.0);
    CHECK(beta.b(-1.0) == 0.0);
    CHECK(std::abs(beta.b(0.5) - 0.5625) < 1e-15);
    const double h = 1e-6;
    CHECK(std::abs((beta.b(1.0) - beta.b(1.0 - h)) / h) < 1e-10 + 1e-5);
    CHECK(std::abs(beta(cplx(0.0, 1e-4)).imag() - M_PI) < 1e-3);
    CHECK(beta(cplx(0.0, 2.0)).imag() > 0.0);
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> re(-3, 3), lg(-5, 1);
    for (int i = 0; i < 200; ++i) CHECK(beta(cplx(re(rng), std::pow(10.0, lg(rng)))).imag() >= 0.0);
    // continuation across the complement of Delta
    for (double x : {-2.0, 1.3, 4.0})
        CHECK(std::abs(beta(cplx(x, 1e-7)) - beta(cplx(x, -1e-7))) < 1e-5);
    // boundary value exactly at an endpoint is finite
    CHECK(std::isfinite(std::abs(beta(cplx(1.0, 0.0)))));
    // sup of the beta difference is bounded by 2 pi max b
    double sup = 0.0;
    for (double k = -1.5; k <= 1.5; k += 0.01)
        for (double eps : {1e-1, 1e-3, 1e-5}) sup = std::max(sup, std::abs(beta(cplx(k, eps)) - beta(cplx(k, -eps))));
    CHECK(sup <= 2 * M_PI * beta.max_b() + 1e-9);
    HerglotzBump peaked({{-2.0, -1.0}, {0.0, 3.0}}, 3, 0.5);
    CHECK(std::abs(peaked.b(-1.5) - 0.5) < 1e-15);
    CHECK(std::abs(peaked.b(1.5) - 0.5) < 1e-15);
    CHECK(peaked.b(-0.5) == 0.0);
    CHECK_THROWS_AS(HerglotzBump({}, 2), PreconditionError);
    CHECK_THROWS_AS(HerglotzBump({{0.0, 1.0}}, 1), PreconditionError);
}

TEST_CASE("C1 extension") {
    C1Extension five([](double) { return 5.0; }, 0.0, 1.0, 0.0);
    for (double x : {-10.0, -0.5, 0.0, 3.0}) CHECK(five(x) == doctest::Approx(5.0));
    C1Extension lin([](double t) { return t; }, 0.0, 1.0, 1.0);
    CHECK(lin(-1.0) == lin.target());
    CHECK(lin(-3.0) == lin.target());
    const double h = 1e-6;
    for (double knot : {0.0, -1.0}) {
        const double left = (lin(knot) - lin(knot - h)) / h;
        const double right = (lin(knot + h) - lin(knot)) / h;
        CHECK(std::abs(left - right) < 1e-5);
        CHECK(std::abs(lin.derivative(knot - 1e-9) - lin.derivative(knot + 1e-9)) < 1e-8);
    }
    // bounded second differences across the blend
    double worst = 0.0;
    for (double x = -1.5; x <= 0.5; x += 0.01) {
        const double d2 = (lin(x + 1e-3) - 2 * lin(x) + lin(x - 1e-3)) / 1e-6;
        worst = std::max(worst, std::abs(d2));
    }
    CHECK(worst < 10.0);
    C1Extension custom([](double t) { return std::sin(t); }, 0.2, 0.5, std::cos(0.2), 3.0);
    const Poly p = custom.blend_local();
    for (double s : {-1.0, -0.2, 0.6, 1.0}) CHECK(std::abs(p.real_at(s) - custom(0.2 - 0.25 + 0.25 * s)) < 1e-13);
    CHECK_THROWS(C1Extension([](double t) { return t; }, 0.0, 0.0, 1.0));
}

TEST_CASE("line norms") {
    LineTrace zero{0.01, {-1.0, 0.0, 1.0}, {0.0, 0.0, 0.0}, 1.0};
    CHECK(line_norm(zero, 2) == 0.0);
    const double eps = 0.01, sigma = 1.0;
    LineTrace lor;
    lor.eps = eps;
    lor.tail_exponent = 1.0;
    for (int i = 0; i <= 20000; ++i) {
        const double x = -50.0 + 100.0 * i / 20000;
        lor.grid.push_back(x);
        lor.values.push_back(1.0 / (cplx(x, eps) - cplx(0.0, -sigma)));
    }
    const double expect = std::sqrt(M_PI / (eps + sigma));
    CHECK(std::abs(line_norm(lor, 2) - expect) < 0.01 * expect);
    LineTrace twice = lor;
    for (auto& v : twice.values) v *= 2.0;
    CHECK(std::abs(line_norm(twice, 2) - 2.0 * line_norm(lor, 2)) < 1e-12);
    CHECK_THROWS_AS(line_norm(lor, 1), PreconditionError);  // s = 1 is too slow for L^1
    lor.tail_exponent.reset();
    CHECK(std::isfinite(line_norm(lor, 1)));
    LineTrace sq = lor;
    sq.tail_exponent = 2.0;
    for (std::size_t i = 0; i < sq.grid.size(); ++i) sq.values[i] = 1.0 / (1.0 + sq.grid[i] * sq.grid[i]);
    CHECK(std::abs(line_norm(sq, 1) - M_PI) < 1e-4);
}

TEST_CASE("graded grids") {
    const double eps = 1e-3;
    auto g = graded_line_grid(-1.0, 1.0, {{0.2, 0.2}, {0.5, 0.6}}, eps);
    CHECK(g.front() == -51.0);
    CHECK(g.back() == 51.0);
    double max_step = 0.0;
    for (std::size_t i = 1; i < g.size(); ++i) {
        REQUIRE(g[i] > g[i - 1]);
        max_step = std::max(max_step, g[i] - g[i - 1]);
        if (std::abs(g[i] - 0.2) < 5 * eps || (g[i] > 0.5 && g[i] < 0.6)) CHECK(g[i] - g[i - 1] <= eps / 8 * 1.0001);
    }
    CHECK(max_step <= 102.0 / 4096 * 1.0001);
    CHECK(g.size() < 20000);

    KnotSpec ks;
    ks.lo = -0.25;
    ks.hi = 3.0;
    ks.dense = 100;
    ks.left_tail = false;
    const std::vector<double> breaks{0.5, 2.0, 0.50001};
    auto k = graded_knots(ks, breaks);
    CHECK(k.front() == -0.25);
    CHECK(k.back() == 1e7);
    for (double b : breaks) CHECK(std::binary_search(k.begin(), k.end(), b));
    for (std::size_t i = 1; i < k.size(); ++i) REQUIRE(k[i] > k[i - 1]);
}
