#pragma once

#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "specann/hardy.hpp"
#include "specann/operator.hpp"

namespace specann {

using Intervals = std::vector<std::pair<double, double>>;

enum class AnnihilatorMode { thm2, thm3 };

struct Thm2Options {
    /// Uniform knot intervals over the right region's dense window.
    int dense = 512;
    /// The dense window extends this far past the support hull.
    double margin = 1.0;
    double growth = 1.1;
    double far = 1e7;
    /// |gamma_A| on the gap must stay above this.
    double separation_floor = 1e-8;
};

/// gamma (and gamma_*) for one of the two constructions, plus beta in the second.
///
/// Gap construction: gamma = gamma_1 gamma_2 [exp(g-hat)], where
///   gamma_1 = gamma_A / O_R, O_R the outer function with |O_R| = |gamma_A| on
///             [-delta0, inf) and 1 elsewhere, so |gamma_1| = |gamma_A| left of
///             -delta0 and 1 to the right;
///   gamma_2 = e^{-i theta_inf} exp(J_psi) undoes the boundary phase theta_1 of
///             gamma_1 on [0, inf), with psi its C^1 extension minus theta_inf.
/// Bump construction: gamma = gamma_A and beta is the Borel transform of b dk.
class AnnihilatorBundle {
public:
    AnnihilatorMode mode() const { return mode_; }
    const OperatorModel& model() const { return *model_; }

    /// Closed upper half-plane; Im lambda = +0 gives the boundary value.
    cplx gamma(cplx lambda) const;
    /// conj gamma(conj lambda), lower half-plane.
    cplx gamma_star(cplx lambda) const { return std::conj(gamma(std::conj(lambda))); }

    cplx gamma1(cplx lambda) const;
    cplx gamma2(cplx lambda) const;
    /// exp(g-hat(lambda)), or 1 when not derealized.
    cplx dereal_factor(cplx lambda) const;

    double delta0() const { return delta0_; }
    double theta_inf() const { return theta_inf_; }
    const OuterFunction& right_outer() const { return *right_outer_; }
    const PiecewisePoly& psi() const { return psi_->density(); }
    bool derealized() const { return static_cast<bool>(dereal_); }
    const Intervals& omega() const { return omega_; }

    const HerglotzBump* beta() const { return beta_ ? beta_.get() : nullptr; }
    const Intervals& delta() const { return delta_; }

private:
    friend AnnihilatorBundle build_gamma_thm2(const OperatorModel&, double, const Thm2Options&);
    friend AnnihilatorBundle derealize(const AnnihilatorBundle&, Intervals, int, double);
    friend AnnihilatorBundle build_beta_thm3(const OperatorModel&, Intervals, int);

    AnnihilatorMode mode_ = AnnihilatorMode::thm2;
    std::shared_ptr<const OperatorModel> model_;
    double delta0_ = 0.0;
    double theta_inf_ = 0.0;
    std::shared_ptr<const OuterFunction> right_outer_;
    std::shared_ptr<const RegularizedCauchy> psi_;
    std::shared_ptr<const HerglotzBump> dereal_;
    Intervals omega_;
    std::shared_ptr<const HerglotzBump> beta_;
    Intervals delta_;
};

/// Gap construction. Requires a spectral gap [-delta0, delta0] with |gamma_A|
/// separated from zero on it and no singular continuous piece right of -delta0.
AnnihilatorBundle build_gamma_thm2(const OperatorModel& model, double delta0, const Thm2Options& opt = {});

/// Multiplies gamma by exp(g-hat) with g = peak ((k - a)(b - k)/((b - a)/2)^2)^shape on Omega.
/// Omega must lie left of -delta0.
AnnihilatorBundle derealize(const AnnihilatorBundle& bundle, Intervals omega, int shape = 2, double peak = 0.5);

/// Bump construction: gamma = gamma_A, b = ((k - a)(b - k))^shape on each interval of Delta.
AnnihilatorBundle build_beta_thm3(const OperatorModel& model, Intervals delta, int shape = 2);

/// T_eps = 2i integral of Im gamma(k + i eps) u conj(v) dmu, one value per eps.
std::vector<cplx> weak_trace_thm2(const AnnihilatorBundle& bundle, const SymbolVector& u, const SymbolVector& v,
                                  std::span<const double> eps_ladder);

/// T_eps = integral of gamma_A(k + i eps) 2i Im beta(k + i eps) u conj(v) dmu.
std::vector<cplx> weak_trace_thm3(const AnnihilatorBundle& bundle, const SymbolVector& u, const SymbolVector& v,
                                  std::span<const double> eps_ladder);

/// eps -> 0 limit of the gap trace from boundary values: only the AC part of
/// mu contributes, 2i integral of Im gamma(k + i0) rho u conj(v) dk.
cplx boundary_limit_thm2(const AnnihilatorBundle& bundle, const SymbolVector& u, const SymbolVector& v);

/// eps -> 0 limit of the bump trace: integral of gamma_A(k + i0) 2 pi i b(k) rho u conj(v) dk.
cplx boundary_limit_thm3(const AnnihilatorBundle& bundle, const SymbolVector& u, const SymbolVector& v);

/// || (beta(A + i eps) - beta_*(A - i eps)) u - 2 pi i b(A) u ||.
double beta_strong_residual(const AnnihilatorBundle& bundle, const SymbolVector& u, double eps);

/// gamma_A(k + i0): exact off atoms and sc hulls, otherwise Richardson
/// extrapolation from k + i eps and k + 2i eps.
cplx gamma_A_boundary(const OperatorModel& model, double k, double eps = 1e-6);

/// Independent route for the gap construction's first factor: the outer
/// function of log|gamma_A| restricted to (-inf, -delta0), with analytic root
/// factors at the atoms there. Atom-only left spectrum.
OuterFunction gamma1_direct(const OperatorModel& model, double delta0, const Thm2Options& opt = {});

struct GammaDiagnostics {
    double sup_gamma = 0.0;        // over a grid in the upper half-plane
    double zero_cancellation = 0.0;  // sup |gamma / gamma_A| on [-10, -delta0] at eps = 1e-4
    double right_imag = 0.0;       // sup |Im gamma| / |gamma| at t + 1e-5 i, t in right sample
};
GammaDiagnostics diagnose(const AnnihilatorBundle& bundle);

}  // namespace specann
