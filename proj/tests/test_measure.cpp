#include <cmath>
#include <random>

#include "doctest.h"
#include "specann/errors.hpp"
#include "specann/measure.hpp"
#include "specann/quadrature.hpp"

using namespace specann;

namespace {

SpectralMeasure single_atom(double a = 0.0, double w = 1.0) { return SpectralMeasure({{a, w}}, {}, {}); }
SpectralMeasure flat(double lo = -1.0, double hi = 1.0) { return SpectralMeasure({}, {{lo, hi, {1.0}}}, {}); }
SpectralMeasure cantor(int max_depth = 22) {
    return SpectralMeasure({}, {}, {ScPiece{0.0, 1.0, 1.0 / 3.0, 0.5, 1.0, max_depth}});
}

}  // namespace

TEST_CASE("single atom transform has the closed form 1/(a - lambda)") {
    CHECK(std::abs(borel_transform(single_atom(), cplx(0, 1)) - cplx(0, 1)) < 1e-15);
}

TEST_CASE("flat density transform equals the logarithmic antiderivative") {
    const cplx v = borel_transform(flat(), cplx(0, 1));
    CHECK(std::abs(v - cplx(0, M_PI / 2)) < 1e-14);
    // quadrature oracle away from the axis
    for (cplx lam : {cplx(0.3, 0.2), cplx(-1.5, 0.01), cplx(4.0, -0.5)}) {
        auto f = [&](double k) { return 1.0 / (k - lam); };
        const auto ref = quad::integrate<cplx>(f, -1.0, 1.0, std::vector<double>{lam.real()},
                                               {.abs_tol = 1e-15, .rel_tol = 1e-12});
        CHECK(std::abs(borel_transform(flat(), lam) - ref.value) < 1e-10 * std::abs(ref.value));
    }
}

TEST_CASE("polynomial densities and symbols match quadrature") {
    SpectralMeasure mu({}, {{-0.5, 1.5, {1.0, 0.5, -0.2}}}, {});
    SymbolVector u({SymbolPiece{-1.0, 0.5, Poly({cplx(1.0, 0.5), cplx(2.0, 0.0)})},
                    SymbolPiece{0.2, 2.0, Poly::constant(cplx(0.0, 1.0))}});
    SymbolVector v = SymbolVector::identity();
    const cplx lam(0.35, 0.003);
    auto f = [&](double k) { return (1.0 + 0.5 * k - 0.2 * k * k) * u(k) * std::conj(v(k)) / (k - lam); };
    const auto ref = quad::integrate<cplx>(f, -0.5, 1.5, std::vector<double>{0.2, 0.35, 0.5},
                                           {.abs_tol = 1e-15, .rel_tol = 1e-12, .max_intervals = 100000});
    CHECK(std::abs(weighted_borel_transform(mu, u, v, lam) - ref.value) < 1e-9 * std::abs(ref.value));
}

TEST_CASE("Cantor transform far away reproduces the total mass") {
    const cplx lam(0, 1000);
    const cplx v = borel_transform(cantor(), lam);
    CHECK(std::abs(v * (-lam) - 1.0) < 1e-3);
    // brute-force oracle: depth-20 leaf sum
    const auto leaves = refine_sc(ScPiece{0.0, 1.0, 1.0 / 3.0, 0.5, 1.0, 22}, 20);
    cplx brute = 0.0;
    for (const auto& l : leaves) brute += l.weight / (l.position - lam);
    // leaf truncation error is O((leaf length / |lambda|)^2)
    CHECK(std::abs(v - brute) < 1e-6 * std::abs(brute));
}

TEST_CASE("Poisson imaginary part") {
    const SymbolVector one = SymbolVector::one();
    for (double eps : {1e-1, 1e-3}) CHECK(std::abs(poisson_imaginary(single_atom(), one, one, 0.0, eps) - 1.0 / eps) < 1e-9 / eps);
    // closed form 2 atan(1/eps)
    const double eps = 1e-4;
    const double p = poisson_imaginary(flat(), one, one, 0.0, eps);
    CHECK(std::abs(p - 2.0 * std::atan(1.0 / eps)) < 1e-12);
    CHECK(std::abs(p - M_PI) < 1e-3);
    CHECK(poisson_imaginary(flat(), SymbolVector::zero(), one, 0.2, 0.1) == 0.0);
    CHECK_THROWS_AS(poisson_imaginary(flat(), one, one, 0.0, 0.0), std::invalid_argument);
}

TEST_CASE("refine_sc leaf positions and weights") {
    ScPiece piece{0.0, 1.0, 1.0 / 3.0, 0.5, 1.0, 20};
    auto d1 = refine_sc(piece, 1);
    REQUIRE(d1.size() == 2);
    CHECK(d1[0].position == doctest::Approx(1.0 / 6.0).epsilon(1e-15));
    CHECK(d1[1].position == doctest::Approx(5.0 / 6.0).epsilon(1e-15));
    CHECK(d1[0].weight == 0.5);
    auto d2 = refine_sc(piece, 2);
    REQUIRE(d2.size() == 4);
    const double expect[] = {1.0 / 18, 5.0 / 18, 13.0 / 18, 17.0 / 18};
    for (int i = 0; i < 4; ++i) {
        CHECK(d2[i].position == doctest::Approx(expect[i]).epsilon(1e-14));
        CHECK(d2[i].weight == 0.25);
    }
    piece.p = 1.0;
    auto deg = refine_sc(piece, 3);
    CHECK(deg.front().weight == 1.0);
    for (std::size_t i = 1; i < deg.size(); ++i) CHECK(deg[i].weight == 0.0);

    piece.p = 0.3;
    piece.mass = 2.5;
    auto d10 = refine_sc(piece, 10);
    CHECK(d10.size() == 1024);
    double sum = 0.0;
    for (const auto& l : d10) sum += l.weight;
    CHECK(std::abs(sum - 2.5) < 1e-13);
    CHECK_THROWS_AS(refine_sc(piece, 0), std::invalid_argument);
    CHECK_THROWS_AS(refine_sc(piece, 21), PrecisionError);
}

TEST_CASE("measure invariants are validated") {
    CHECK_THROWS(SpectralMeasure({{0.0, 1.0}, {0.0, 2.0}}, {}, {}));
    CHECK_THROWS(SpectralMeasure({{0.0, -1.0}}, {}, {}));
    CHECK_THROWS(SpectralMeasure({}, {{0.0, 1.0, {-1.0}}}, {}));
    CHECK_THROWS(SpectralMeasure({}, {}, {ScPiece{0.0, 1.0, 0.6, 0.5, 1.0, 10}}));
    SpectralMeasure mu({{3.0, 0.25}}, {{-1.0, 1.0, {0.5}}}, {ScPiece{5.0, 6.0, 0.2, 0.4, 2.0, 10}});
    CHECK(std::abs(mu.total_mass() - 3.25) < 1e-12);
    CHECK(mu.hull() == std::pair<double, double>{-1.0, 6.0});
}

TEST_CASE("boundary and precision errors") {
    CHECK_THROWS_AS(borel_transform(single_atom(0.5), cplx(0.5, 0.0)), BoundaryEvaluationError);
    CHECK_THROWS_AS(borel_transform(cantor(), cplx(0.5, 0.0)), BoundaryEvaluationError);
    CHECK_THROWS_AS(borel_transform(cantor(5), cplx(0.5, 1e-6)), PrecisionError);
    try {
        borel_transform(cantor(5), cplx(0.5, 1e-6));
    } catch (const PrecisionError& e) {
        CHECK(e.required_depth() > 5);
    }
    // outside the support the real axis is fine
    CHECK(std::abs(borel_transform(single_atom(0.5), cplx(2.5, 0.0)) - cplx(-0.5, 0.0)) < 1e-15);
    CHECK(std::isfinite(std::abs(borel_transform(cantor(), cplx(1.5, 0.0)))));
}

TEST_CASE("Herglotz, conjugate symmetry and decay on random points") {
    SpectralMeasure mu({{-0.7, 0.3}}, {{0.0, 1.0, {1.0, -0.5}}}, {ScPiece{-2.0, -1.0, 0.25, 0.6, 0.5, 24}});
    SymbolVector w({SymbolPiece{-3.0, 3.0, Poly({cplx(1.0, 0.2), cplx(0.5, -0.1)})}});
    WeightedMeasure sq(mu, w, w);
    WeightedMeasure plain(mu);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> re(-3.0, 2.0), lg(-3.0, 1.0);
    for (int i = 0; i < 300; ++i) {
        const cplx lam(re(rng), std::pow(10.0, lg(rng)));
        CHECK(sq.transform(lam).imag() > 0.0);
        CHECK(std::abs(plain.transform(std::conj(lam)) - std::conj(plain.transform(lam))) <
              1e-12 * std::abs(plain.transform(lam)));
    }
    double prev = 1e300;
    for (double tau : {1e2, 1e3, 1e4}) {
        const double err = std::abs(plain.transform(cplx(0, tau)) * cplx(0, -tau) - mu.total_mass());
        CHECK(err < 5.0 / tau);
        CHECK(err < prev);
        prev = err;
    }
}

TEST_CASE("refinement consistency between consecutive depths") {
    ScPiece piece{0.0, 1.0, 1.0 / 3.0, 0.5, 1.0, 20};
    const cplx lam(0.4, 0.01);
    for (int d = 4; d <= 9; ++d) {
        cplx a = 0.0, b = 0.0;
        for (const auto& l : refine_sc(piece, d)) a += l.weight / (l.position - lam);
        for (const auto& l : refine_sc(piece, d + 1)) b += l.weight / (l.position - lam);
        const double scale = std::pow(1.0 / 3.0, d) / 0.01;
        CHECK(std::abs(a - b) <= 2.0 * scale * scale + 1e-14);
    }
}

TEST_CASE("component masks separate an atom sitting on an AC piece") {
    SpectralMeasure mu({{0.0, 1.0}}, {{-1.0, 1.0, {1.0}}}, {});
    SymbolVector only_ac = SymbolVector::one().masked({{ComponentKind::ac, 0}});
    SymbolVector only_atom = SymbolVector::one().masked({{ComponentKind::atom, 0}});
    const cplx lam(0.0, 1.0);
    CHECK(std::abs(weighted_borel_transform(mu, only_ac, only_ac, lam) - cplx(0, M_PI / 2)) < 1e-14);
    CHECK(std::abs(weighted_borel_transform(mu, only_atom, only_atom, lam) - cplx(0, 1)) < 1e-14);
    CHECK(std::abs(weighted_borel_transform(mu, only_ac, only_atom, lam)) == 0.0);
    CHECK(std::abs(inner_product(mu, only_ac, only_ac) - 2.0) < 1e-14);
}
