#include "specann/operator.hpp"

#include <cmath>
#include <string>

#include "specann/errors.hpp"

namespace specann {

namespace {

void check_singular(const Eigen::PartialPivLU<CMatrix>& lu, cplx lambda) {
    if (std::abs(lu.determinant()) < 1e-14)
        throw SingularEvaluationError("I - iF(lambda) is numerically singular at lambda = (" +
                                      std::to_string(lambda.real()) + ", " + std::to_string(lambda.imag()) + ")");
}

double rel_rank_tol(const Eigen::VectorXd& sv, double tol) { return sv.size() ? sv(0) * tol : 0.0; }

}  // namespace

OperatorModel::OperatorModel(SpectralMeasure mu, double v)
    : mu_(std::make_shared<const SpectralMeasure>(std::move(mu))), couplings_{{SymbolVector::one(), v}} {
    init();
}

OperatorModel::OperatorModel(SpectralMeasure mu, std::vector<Coupling> couplings)
    : mu_(std::make_shared<const SpectralMeasure>(std::move(mu))), couplings_(std::move(couplings)) {
    init();
}

OperatorModel OperatorModel::rank_two(SpectralMeasure mu, double v1, double v2) {
    return OperatorModel(std::move(mu), {{SymbolVector::one(), v1}, {SymbolVector::identity(), v2}});
}

void OperatorModel::init() {
    if (couplings_.empty()) throw PreconditionError("coupling rank must be at least 1");
    for (const auto& c : couplings_)
        if (!(c.strength > 0.0) || !std::isfinite(c.strength))
            throw PreconditionError("coupling strengths must be positive and finite");
    const int r = rank();
    pairings_.reserve(static_cast<std::size_t>(r * r));
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < r; ++j) pairings_.emplace_back(*mu_, couplings_[j].vector, couplings_[i].vector);

    const CMatrix g = gram();
    Eigen::SelfAdjointEigenSolver<CMatrix> es(g);
    const Eigen::VectorXd ev = es.eigenvalues();
    if (!(ev(0) > 1e-10 * std::max(ev(r - 1), 1e-300)))
        throw PreconditionError("coupling vectors are linearly dependent in L^2(mu)");
}

CMatrix OperatorModel::gram() const {
    const int r = rank();
    CMatrix g(r, r);
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < r; ++j) g(i, j) = inner_product(*mu_, couplings_[j].vector, couplings_[i].vector);
    return g;
}

CMatrix OperatorModel::resolvent_pairing(cplx lambda) const {
    const int r = rank();
    CMatrix g(r, r);
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < r; ++j) g(i, j) = pairings_[static_cast<std::size_t>(i * r + j)].transform(lambda);
    return g;
}

CMatrix OperatorModel::coupling_matrix(cplx lambda) const {
    CMatrix f = resolvent_pairing(lambda);
    const int r = rank();
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < r; ++j) f(i, j) *= std::sqrt(couplings_[i].strength * couplings_[j].strength);
    return f;
}

cplx perturbation_determinant(const OperatorModel& m, cplx lambda) {
    if (lambda.imag() == 0.0 && m.measure().touches_singular(lambda.real()))
        throw BoundaryEvaluationError("perturbation determinant requested on singular support; sample at x + i eps");
    const CMatrix f = m.coupling_matrix(lambda);
    return (CMatrix::Identity(f.rows(), f.cols()) + f).determinant();
}

CMatrix characteristic_function(const OperatorModel& m, cplx lambda) {
    const CMatrix f = m.coupling_matrix(lambda);
    const CMatrix id = CMatrix::Identity(f.rows(), f.cols());
    const cplx i(0.0, 1.0);
    Eigen::PartialPivLU<CMatrix> lu(id - i * f);
    check_singular(lu, lambda);
    // (I + iF)(I - iF)^{-1}; the two factors commute
    return lu.solve(id + i * f);
}

CMatrix theta(const OperatorModel& m, cplx lambda) {
    const CMatrix s = characteristic_function(m, lambda);
    return (CMatrix::Identity(s.rows(), s.cols()) + s) / 2.0;
}

CMatrix theta_prime(const OperatorModel& m, cplx lambda) { return theta(m, std::conj(lambda)).adjoint(); }

cplx delta_plus(const OperatorModel& m, cplx lambda) { return theta(m, lambda).determinant(); }

cplx delta_minus(const OperatorModel& m, cplx lambda) { return std::conj(delta_plus(m, std::conj(lambda))); }

cplx delta(const OperatorModel& m, cplx lambda) {
    return std::signbit(lambda.imag()) ? delta_minus(m, lambda) : delta_plus(m, lambda);
}

cplx gamma_A(const OperatorModel& m, cplx lambda) {
    if (m.rank() > 1) {
        const CMatrix f = m.coupling_matrix(lambda);
        Eigen::PartialPivLU<CMatrix> lu(CMatrix::Identity(f.rows(), f.cols()) - cplx(0.0, 1.0) * f);
        check_singular(lu, lambda);
        return 1.0 / lu.determinant();
    }
    const cplx d = perturbation_determinant(m, lambda);
    const cplx denom = 1.0 - cplx(0.0, 1.0) * (d - 1.0);
    if (std::abs(denom) < 1e-14) throw SingularEvaluationError("1 - i(D - 1) vanishes numerically");
    return 1.0 / denom;
}

double boundary_log_modulus(const OperatorModel& m, double x, double eps) {
    const SpectralMeasure& mu = m.measure();
    if (!mu.touches_singular(x)) return std::log(std::abs(gamma_A(m, cplx(x, 0.0))));
    const double f1 = std::log(std::abs(gamma_A(m, cplx(x, eps))));
    const double f2 = std::log(std::abs(gamma_A(m, cplx(x, 2.0 * eps))));
    return 2.0 * f1 - f2;
}

int resolvent_span_rank(const OperatorModel& m, const std::vector<cplx>& samples, double tol) {
    const SpectralMeasure& mu = m.measure();
    if (!mu.ac_pieces().empty() || !mu.sc_pieces().empty())
        throw PreconditionError("resolvent span rank is implemented for atom-only measures");
    const auto& atoms = mu.atoms();
    const auto n = static_cast<Eigen::Index>(atoms.size());
    const auto s = static_cast<Eigen::Index>(samples.size());
    // columns: (A - lambda_k)^{-1} phi in the orthonormal atom basis
    CMatrix cols(n, s * m.rank());
    for (Eigen::Index k = 0; k < s; ++k)
        for (int j = 0; j < m.rank(); ++j)
            for (Eigen::Index a = 0; a < n; ++a) {
                const Atom& at = atoms[static_cast<std::size_t>(a)];
                cols(a, k * m.rank() + j) =
                    std::sqrt(at.weight) * m.couplings()[j].vector(at.position) / (at.position - samples[k]);
            }
    Eigen::JacobiSVD<CMatrix> svd(cols);
    const Eigen::VectorXd sv = svd.singularValues();
    const double cut = rel_rank_tol(sv, tol);
    int rank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv(i) > cut) ++rank;
    return rank;
}

}  // namespace specann
