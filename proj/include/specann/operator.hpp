#pragma once

#include <Eigen/Dense>
#include <memory>
#include <vector>

#include "specann/measure.hpp"

namespace specann {

using CMatrix = Eigen::MatrixXcd;

struct Coupling {
    SymbolVector vector;
    double strength = 1.0;
};

/// Multiplication operator A on L^2(mu) with the finite-rank coupling
/// V = sum_j v_j <., phi_j> phi_j (J = I, so V >= 0 and alpha = sqrt(2V)).
class OperatorModel {
public:
    /// Rank one with phi = 1 and strength v.
    explicit OperatorModel(SpectralMeasure mu, double v = 1.0);
    /// Throws PreconditionError when the coupling vectors are linearly dependent in L^2(mu).
    OperatorModel(SpectralMeasure mu, std::vector<Coupling> couplings);

    /// phi_1 = 1 and phi_2 = k with the given strengths.
    static OperatorModel rank_two(SpectralMeasure mu, double v1 = 1.0, double v2 = 1.0);

    int rank() const { return static_cast<int>(couplings_.size()); }
    const SpectralMeasure& measure() const { return *mu_; }
    const std::vector<Coupling>& couplings() const { return couplings_; }

    /// Gram matrix <phi_j, phi_i>.
    CMatrix gram() const;
    /// G_ij = <(A - lambda)^{-1} phi_j, phi_i>, unscaled.
    CMatrix resolvent_pairing(cplx lambda) const;
    /// F(lambda) = diag(sqrt v) G diag(sqrt v); Herglotz in the upper half-plane.
    CMatrix coupling_matrix(cplx lambda) const;

private:
    std::shared_ptr<const SpectralMeasure> mu_;
    std::vector<Coupling> couplings_;
    std::vector<WeightedMeasure> pairings_;  // row-major: (i, j) -> phi_j conj(phi_i) dmu

    void init();
};

/// det(I + F(lambda)).
cplx perturbation_determinant(const OperatorModel& m, cplx lambda);
/// S = (I + iF)(I - iF)^{-1}; contractive for Im lambda > 0.
CMatrix characteristic_function(const OperatorModel& m, cplx lambda);
/// (I + S)/2 = (I - iF)^{-1}.
CMatrix theta(const OperatorModel& m, cplx lambda);
/// Theta'(lambda) = Theta(conj lambda)^*, for lambda in the lower half-plane.
CMatrix theta_prime(const OperatorModel& m, cplx lambda);
/// det Theta(lambda) in the upper half-plane.
cplx delta_plus(const OperatorModel& m, cplx lambda);
/// conj delta_plus(conj lambda) in the lower half-plane.
cplx delta_minus(const OperatorModel& m, cplx lambda);
/// Dispatches on the half-plane of lambda.
cplx delta(const OperatorModel& m, cplx lambda);

/// Rank one: 1/(1 - i(D - 1)). Higher rank: det Theta.
///
/// Im lambda = +0 is accepted where mu has no atom or sc piece; the value is
/// then the exact boundary value from above.
cplx gamma_A(const OperatorModel& m, cplx lambda);

/// log|gamma_A(x + i0)|. Exact off atoms and sc hulls; elsewhere a Richardson
/// extrapolation from x + i eps and x + 2i eps. May be -inf on an atom.
double boundary_log_modulus(const OperatorModel& m, double x, double eps = 1e-6);

/// Numerical rank of the Gram matrix of (A - lambda_k)^{-1} phi over the given
/// sample points (relative tolerance `tol` on singular values). Atom-only measures.
int resolvent_span_rank(const OperatorModel& m, const std::vector<cplx>& samples, double tol = 1e-9);

}  // namespace specann
