#include "specann/annihilator.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "specann/errors.hpp"
#include "specann/quadrature.hpp"

namespace specann {

namespace {

const cplx I(0.0, 1.0);

void validate_ladder(std::span<const double> ladder) {
    if (ladder.empty()) throw std::invalid_argument("eps ladder is empty");
    for (std::size_t i = 0; i < ladder.size(); ++i) {
        if (!(ladder[i] > 0.0) || !std::isfinite(ladder[i]))
            throw std::invalid_argument("eps ladder values must be positive and finite");
        if (i > 0 && !(ladder[i] < ladder[i - 1])) throw std::invalid_argument("eps ladder must be strictly decreasing");
    }
}

double nudge(double x) { return 1e-12 * std::max(1.0, std::abs(x)); }

// log|g(x + i0)| for g = gamma_A divided by root factors at `zeros`; nudged off
// points where the exact boundary value is not available.
double regular_logmod(const OperatorModel& model, const std::vector<double>& zeros, double x) {
    cplx lambda(x, 0.0);
    cplx g;
    try {
        g = gamma_A(model, lambda);
    } catch (const BoundaryEvaluationError&) {
        lambda = cplx(x, nudge(x));
        g = gamma_A(model, lambda);
    }
    double v = std::log(std::abs(g));
    for (double a : zeros) v -= std::log(std::abs(lambda - a) / std::abs(lambda - a + I));
    if (!std::isfinite(v)) {
        lambda = cplx(x, nudge(x));
        v = std::log(std::abs(gamma_A(model, lambda)));
        for (double a : zeros) v -= std::log(std::abs(lambda - a) / std::abs(lambda - a + I));
    }
    if (!std::isfinite(v)) throw NumericError("boundary log-modulus is not finite at " + std::to_string(x));
    return v;
}

// Extra quadrature breaks: atoms and sc hull endpoints.
std::vector<double> singular_breaks(const SpectralMeasure& mu) {
    std::vector<double> b;
    for (const auto& a : mu.atoms()) b.push_back(a.position);
    for (const auto& s : mu.sc_pieces()) {
        b.push_back(s.lo);
        b.push_back(s.hi);
    }
    return b;
}

cplx ac_boundary_integral(const SpectralMeasure& mu, const SymbolVector& u, const SymbolVector& v,
                          const std::function<cplx(double)>& g) {
    cplx total = 0.0;
    const auto& ac = mu.ac_pieces();
    const auto breaks = singular_breaks(mu);
    for (int i = 0; i < static_cast<int>(ac.size()); ++i) {
        const ComponentRef c{ComponentKind::ac, i};
        if (!u.active(c) || !v.active(c)) continue;
        const AcPiece& p = ac[static_cast<std::size_t>(i)];
        const Poly rho = Poly::from_real(p.density);
        std::vector<double> bk = u.breakpoints(p.lo, p.hi);
        for (double b : v.breakpoints(p.lo, p.hi)) bk.push_back(b);
        for (double b : breaks)
            if (b > p.lo && b < p.hi) bk.push_back(b);
        std::sort(bk.begin(), bk.end());
        auto f = [&](double k) { return g(k) * rho.real_at(k) * u(k) * std::conj(v(k)); };
        quad::Options opt;
        opt.rel_tol = 1e-9;
        opt.abs_tol = 1e-14;
        opt.max_intervals = 20000;
        total += quad::integrate<cplx>(f, p.lo, p.hi, bk, opt).value;
    }
    return total;
}

// Quadrature floor for trace integrals: far below the weight's own size, but
// loose enough that adaptive refinement ignores rounding-level kinks at knots.
double trace_tol(const WeightedMeasure& wm) { return std::max(1e-11 * std::abs(wm.total()), 1e-300); }

// gamma_A vanishes like 1/log at an AC endpoint; its phase has a cusp there that
// uniform cubic pieces miss, so knots are graded geometrically toward it.
void add_endpoint_cluster(std::vector<double>& breaks, double e, double h) {
    for (int k = 1; k <= 40; ++k) {
        const double d = h * std::ldexp(1.0, -k);
        breaks.push_back(e - d);
        breaks.push_back(e + d);
    }
}

}  // namespace

// ---------------------------------------------------------------- bundle evaluation

cplx AnnihilatorBundle::gamma1(cplx lambda) const {
    if (mode_ == AnnihilatorMode::thm3) return gamma_A(*model_, lambda);
    return gamma_A(*model_, lambda) / (*right_outer_)(lambda);
}

cplx AnnihilatorBundle::gamma2(cplx lambda) const {
    if (mode_ == AnnihilatorMode::thm3) return 1.0;
    return std::exp((*psi_)(lambda) - I * theta_inf_);
}

cplx AnnihilatorBundle::dereal_factor(cplx lambda) const { return dereal_ ? std::exp((*dereal_)(lambda)) : cplx(1.0); }

cplx AnnihilatorBundle::gamma(cplx lambda) const {
    if (std::signbit(lambda.imag())) throw std::domain_error("gamma is evaluated in the closed upper half-plane");
    return gamma1(lambda) * gamma2(lambda) * dereal_factor(lambda);
}

cplx gamma_A_boundary(const OperatorModel& model, double k, double eps) {
    if (!model.measure().touches_singular(k)) {
        try {
            return gamma_A(model, cplx(k, 0.0));
        } catch (const BoundaryEvaluationError&) {
        }
    }
    return 2.0 * gamma_A(model, cplx(k, eps)) - gamma_A(model, cplx(k, 2.0 * eps));
}

// ---------------------------------------------------------------- builders

AnnihilatorBundle build_gamma_thm2(const OperatorModel& model, double delta0, const Thm2Options& opt) {
    if (!(delta0 > 0.0) || !std::isfinite(delta0)) throw PreconditionError("delta0 must be positive and finite");
    const SpectralMeasure& mu = model.measure();
    for (const auto& c : mu.components()) {
        const auto [a, b] = mu.component_interval(c);
        if (b >= -delta0 && a <= delta0)
            throw PreconditionError("spectral gap around 0 is narrower than delta0: support meets [" +
                                    std::to_string(a) + ", " + std::to_string(b) + "]");
    }
    for (const auto& s : mu.sc_pieces())
        if (s.hi > -delta0)
            throw PreconditionError("singular continuous piece right of the gap is not supported by the gap construction");
    for (int i = 0; i <= 100; ++i) {
        const double x = -delta0 + 2.0 * delta0 * i / 100.0;
        if (!(std::abs(gamma_A(model, cplx(x, 0.0))) > opt.separation_floor))
            throw PreconditionError("|gamma_A| is not separated from zero on the gap at " + std::to_string(x));
    }

    AnnihilatorBundle out;
    out.mode_ = AnnihilatorMode::thm2;
    out.model_ = std::make_shared<const OperatorModel>(model);
    out.delta0_ = delta0;

    std::vector<double> right_atoms, breaks{0.0, -delta0};
    for (const auto& a : mu.atoms())
        if (a.position > delta0) right_atoms.push_back(a.position);
    std::vector<double> ac_right;
    for (const auto& p : mu.ac_pieces())
        for (double e : {p.lo, p.hi})
            if (e > delta0) ac_right.push_back(e);

    // log-modulus data of O_R: log|gamma_A| right of -delta0; root factors at the
    // right atoms are split off, so their log-modulus is compensated everywhere
    const auto hull = mu.hull();
    KnotSpec ks;
    ks.hi = std::max(hull.second, delta0) + opt.margin;
    ks.dense = opt.dense;
    ks.growth = opt.growth;
    ks.far = opt.far;
    if (right_atoms.empty()) {
        ks.lo = -delta0;
        ks.left_tail = false;
    } else {
        ks.lo = std::min(hull.first, -delta0) - opt.margin;
    }
    for (double e : ac_right) {
        breaks.push_back(e);
        add_endpoint_cluster(breaks, e, (ks.hi - ks.lo) / ks.dense);
    }
    const std::vector<double> knots = graded_knots(ks, breaks);
    auto roots_only = [&](double x) {
        double v = 0.0;
        for (double a : right_atoms) v -= std::log(std::abs(x - a) / std::abs(cplx(x - a, 1.0)));
        return v;
    };
    // sample left and right of -delta0 separately so the jump sits on a knot
    std::vector<double> left, right;
    for (double k : knots) {
        if (k <= -delta0) left.push_back(k);
        if (k >= -delta0) right.push_back(k);
    }
    PiecewisePoly logmod = PiecewisePoly::sample([&](double x) { return regular_logmod(model, right_atoms, x); }, right, 3);
    if (left.size() >= 2) logmod = logmod + PiecewisePoly::sample(roots_only, left, 3);
    out.right_outer_ = std::make_shared<const OuterFunction>(std::move(logmod), right_atoms);

    // boundary phase of gamma_1 on [0, inf), unwrapped along increasing x
    std::vector<double> rk;
    for (double k : knots)
        if (k >= 0.0) rk.push_back(k);
    double last = std::nan("");
    auto theta1 = [&](double x) {
        cplx g;
        try {
            g = out.gamma1(cplx(x, 0.0));
            if (!std::isfinite(std::abs(g)) || std::abs(g) == 0.0) throw BoundaryEvaluationError("degenerate");
        } catch (const BoundaryEvaluationError&) {
            g = out.gamma1(cplx(x, nudge(x)));
        }
        double a = std::arg(g);
        if (std::isfinite(last)) a += 2.0 * M_PI * std::round((last - a) / (2.0 * M_PI));
        last = a;
        return a;
    };
    const PiecewisePoly th = PiecewisePoly::sample(theta1, rk, 3);
    out.theta_inf_ = th.left_limit(rk.back());
    const auto& first = th.segments().front();
    const double slope0 = first.local.derivative().real_at(-1.0) / first.half();
    const C1Extension ext([&th](double x) { return th(x); }, 0.0, delta0, slope0, out.theta_inf_);
    PiecewisePoly blend({{-delta0, 0.0, ext.blend_local() + Poly::constant(-out.theta_inf_)}});
    out.psi_ = std::make_shared<const RegularizedCauchy>(blend + th.shifted_value(-out.theta_inf_));
    return out;
}

AnnihilatorBundle derealize(const AnnihilatorBundle& bundle, Intervals omega, int shape, double peak) {
    if (bundle.mode() != AnnihilatorMode::thm2) throw PreconditionError("derealization applies to the gap construction");
    if (omega.empty()) return bundle;
    for (const auto& [a, b] : omega)
        if (b > 0.0) throw PreconditionError("derealization set must lie in (-inf, 0)");
    AnnihilatorBundle out = bundle;
    out.dereal_ = std::make_shared<const HerglotzBump>(omega, shape, peak);
    out.omega_ = out.dereal_->intervals();
    return out;
}

AnnihilatorBundle build_beta_thm3(const OperatorModel& model, Intervals delta, int shape) {
    if (delta.empty()) throw PreconditionError("target set Delta is empty");
    AnnihilatorBundle out;
    out.mode_ = AnnihilatorMode::thm3;
    out.model_ = std::make_shared<const OperatorModel>(model);
    out.beta_ = std::make_shared<const HerglotzBump>(std::move(delta), shape);
    out.delta_ = out.beta_->intervals();
    return out;
}

// ---------------------------------------------------------------- traces

std::vector<cplx> weak_trace_thm2(const AnnihilatorBundle& bundle, const SymbolVector& u, const SymbolVector& v,
                                  std::span<const double> eps_ladder) {
    validate_ladder(eps_ladder);
    if (bundle.mode() != AnnihilatorMode::thm2) throw PreconditionError("gap trace needs a gap-construction bundle");
    const WeightedMeasure wm(bundle.model().measure(), u, v);
    const auto breaks = singular_breaks(bundle.model().measure());
    std::vector<cplx> out;
    for (double eps : eps_ladder) {
        auto g = [&](double k) { return cplx(0.0, 2.0 * bundle.gamma(cplx(k, eps)).imag()); };
        out.push_back(wm.integrate(g, eps / 10.0, breaks, trace_tol(wm)));
    }
    return out;
}

std::vector<cplx> weak_trace_thm3(const AnnihilatorBundle& bundle, const SymbolVector& u, const SymbolVector& v,
                                  std::span<const double> eps_ladder) {
    validate_ladder(eps_ladder);
    if (bundle.mode() != AnnihilatorMode::thm3 || !bundle.beta())
        throw PreconditionError("bump trace needs a bump-construction bundle");
    const WeightedMeasure wm(bundle.model().measure(), u, v);
    const auto breaks = singular_breaks(bundle.model().measure());
    const HerglotzBump& beta = *bundle.beta();
    std::vector<cplx> out;
    for (double eps : eps_ladder) {
        auto g = [&](double k) {
            const cplx lam(k, eps);
            return gamma_A(bundle.model(), lam) * cplx(0.0, 2.0 * beta(lam).imag());
        };
        out.push_back(wm.integrate(g, eps / 10.0, breaks, trace_tol(wm)));
    }
    return out;
}

cplx boundary_limit_thm2(const AnnihilatorBundle& bundle, const SymbolVector& u, const SymbolVector& v) {
    if (bundle.mode() != AnnihilatorMode::thm2) throw PreconditionError("gap limit needs a gap-construction bundle");
    auto g = [&](double k) {
        const cplx b(k, 0.0);
        const cplx gam = gamma_A_boundary(bundle.model(), k) / bundle.right_outer()(b) * bundle.gamma2(b) *
                         bundle.dereal_factor(b);
        return cplx(0.0, 2.0 * gam.imag());
    };
    return ac_boundary_integral(bundle.model().measure(), u, v, g);
}

cplx boundary_limit_thm3(const AnnihilatorBundle& bundle, const SymbolVector& u, const SymbolVector& v) {
    if (bundle.mode() != AnnihilatorMode::thm3 || !bundle.beta())
        throw PreconditionError("bump limit needs a bump-construction bundle");
    const HerglotzBump& beta = *bundle.beta();
    auto g = [&](double k) { return gamma_A_boundary(bundle.model(), k) * beta.beta0(k); };
    return ac_boundary_integral(bundle.model().measure(), u, v, g);
}

double beta_strong_residual(const AnnihilatorBundle& bundle, const SymbolVector& u, double eps) {
    if (!bundle.beta()) throw PreconditionError("strong residual needs a bump-construction bundle");
    const HerglotzBump& beta = *bundle.beta();
    const WeightedMeasure wm(bundle.model().measure(), u, u);
    auto g = [&](double k) {
        const cplx d = cplx(0.0, 2.0 * beta(cplx(k, eps)).imag()) - beta.beta0(k);
        return cplx(std::norm(d), 0.0);
    };
    return std::sqrt(std::max(0.0, wm.integrate(g, eps / 10.0, singular_breaks(bundle.model().measure())).real()));
}

OuterFunction gamma1_direct(const OperatorModel& model, double delta0, const Thm2Options& opt) {
    const SpectralMeasure& mu = model.measure();
    for (const auto& p : mu.ac_pieces())
        if (p.lo < -delta0) throw PreconditionError("direct route supports atom-only spectrum left of the gap");
    for (const auto& s : mu.sc_pieces())
        if (s.lo < -delta0) throw PreconditionError("direct route supports atom-only spectrum left of the gap");
    std::vector<double> left_atoms;
    for (const auto& a : mu.atoms())
        if (a.position < -delta0) left_atoms.push_back(a.position);
    const auto hull = mu.hull();
    KnotSpec ks;
    ks.lo = std::min(hull.first, -delta0) - opt.margin;
    ks.hi = std::max(hull.second, delta0) + opt.margin;
    ks.dense = opt.dense;
    ks.growth = opt.growth;
    ks.far = opt.far;
    const std::vector<double> knots = graded_knots(ks, std::vector<double>{-delta0});
    std::vector<double> left, right;
    for (double k : knots) {
        if (k <= -delta0) left.push_back(k);
        if (k >= -delta0) right.push_back(k);
    }
    auto roots_only = [&](double x) {
        double v = 0.0;
        for (double a : left_atoms) v -= std::log(std::abs(x - a) / std::abs(cplx(x - a, 1.0)));
        return v;
    };
    auto l = PiecewisePoly::sample([&](double x) { return regular_logmod(model, left_atoms, x); }, left, 3);
    auto r = PiecewisePoly::sample(roots_only, right, 3);
    return OuterFunction(l + r, left_atoms);
}

GammaDiagnostics diagnose(const AnnihilatorBundle& bundle) {
    GammaDiagnostics d;
    const auto hull = bundle.model().measure().hull();
    for (int i = 0; i < 40; ++i)
        for (int j = 0; j < 25; ++j) {
            const double x = hull.first - 2.0 + (hull.second - hull.first + 4.0) * i / 39.0;
            const double y = std::pow(10.0, -4.0 + 5.0 * j / 24.0);
            d.sup_gamma = std::max(d.sup_gamma, std::abs(bundle.gamma(cplx(x, y))));
        }
    if (bundle.mode() == AnnihilatorMode::thm3) {
        d.zero_cancellation = 1.0;
        return d;
    }
    const double delta0 = bundle.delta0();
    for (int i = 0; i <= 200; ++i) {
        const cplx lam(-10.0 + (10.0 - delta0) * i / 200.0, 1e-4);
        d.zero_cancellation = std::max(d.zero_cancellation, std::abs(bundle.gamma(lam) / gamma_A(bundle.model(), lam)));
    }
    for (int i = 0; i <= 200; ++i) {
        const double t = 0.5 * delta0 + (hull.second + 1.0 - 0.5 * delta0) * i / 200.0;
        const cplx g = bundle.gamma(cplx(t, 1e-5));
        d.right_imag = std::max(d.right_imag, std::abs(g.imag()) / std::abs(g));
    }
    return d;
}

}  // namespace specann
