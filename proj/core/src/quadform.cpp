#include "ocie/quadform.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "ocie/errors.hpp"
#include "ocie/fredholm.hpp"

namespace ocie {

const char* to_string(PdVerdict v) {
    switch (v) {
    case PdVerdict::PositiveDefinite: return "PositiveDefinite";
    case PdVerdict::PositiveSemiDefinite: return "PositiveSemiDefinite";
    case PdVerdict::Indefinite: return "Indefinite";
    }
    return "?";
}

namespace {

void check_shapes(const QuadFormProblem& p) {
    if (p.K1.arity() != KernelArity::One || p.K2.arity() != KernelArity::Two)
        throw std::invalid_argument("QuadFormProblem: K1 must be one-arg, K2 two-arg");
    const int n = p.r0.dim();
    if (p.K1.rows() != n || p.K1.cols() != n || p.K2.rows() != n || p.K2.cols() != n)
        throw std::invalid_argument("QuadFormProblem: kernel shapes inconsistent with r0");
    if (!same_grid(*p.K1.grid(), *p.r0.grid()) || !same_grid(*p.K2.grid(), *p.r0.grid()))
        throw std::invalid_argument("QuadFormProblem: grid mismatch");
}

} // namespace

QuadFormProblem symmetrize(const QuadFormProblem& p) {
    check_shapes(p);
    const int nn = p.r0.size();
    MatrixKernelField K1s(p.K1.grid(), KernelArity::One, p.K1.rows(), p.K1.cols());
    for (int i = 0; i < nn; ++i)
        K1s.block(i) = 0.5 * (p.K1.block(i) + p.K1.block(i).transpose());
    MatrixKernelField K2s(p.K2.grid(), KernelArity::Two, p.K2.rows(), p.K2.cols());
    for (int i = 0; i < nn; ++i)
        for (int j = 0; j < nn; ++j)
            K2s.block(i, j) = 0.5 * (p.K2.block(i, j) + p.K2.block(j, i).transpose());
    return QuadFormProblem{std::move(K1s), std::move(K2s), p.r0};
}

double eval_Eq(const QuadFormProblem& p, const GridFunction& w) {
    check_shapes(p);
    if (w.dim() != p.r0.dim() || !same_grid(*w.grid(), *p.r0.grid()))
        throw std::invalid_argument("eval_Eq: shape mismatch");
    const Eigen::VectorXd& qw = w.grid()->weights();
    const int nn = w.size();
    double acc = 0.0;
    for (int i = 0; i < nn; ++i) {
        const Eigen::VectorXd wi = w.at(i);
        acc += 0.5 * qw[i] * wi.dot(p.K1.block(i) * wi);
        for (int j = 0; j < nn; ++j)
            acc += 0.5 * qw[i] * qw[j] * wi.dot(p.K2.block(i, j) * w.at(j));
    }
    return acc;
}

double eval_E(const QuadFormProblem& p, const GridFunction& w) {
    return eval_Eq(p, w) + inner_product(p.r0, w);
}

double eval_E_extended(const QuadFormProblem& p, const GridFunction& w,
                       const GridFunction& v) {
    check_shapes(p);
    if (w.dim() != p.r0.dim() || v.dim() != p.r0.dim() ||
        !same_grid(*w.grid(), *p.r0.grid()) || !same_grid(*v.grid(), *p.r0.grid()))
        throw std::invalid_argument("eval_E_extended: shape mismatch");
    const Grid& grid = *w.grid();
    const double measure = grid.b() - grid.a();
    const Eigen::VectorXd& qw = grid.weights();
    const int nn = w.size();

    double quad = 0.0, lin = 0.0;
    for (int i = 0; i < nn; ++i) {
        const Eigen::VectorXd wi = w.at(i);
        const double ri_wi = p.r0.at(i).dot(wi);
        for (int j = 0; j < nn; ++j) {
            const Eigen::VectorXd vj = v.at(j);
            const double wij = qw[i] * qw[j];
            double q = wi.dot(p.K1.block(i) * wi) / measure;
            q += 2.0 * wi.dot(p.K2.block(i, j) * vj); // off-diagonal blocks, both halves
            q += vj.dot(p.K1.block(j) * vj) / measure;
            quad += 0.25 * wij * q;
            lin += 0.5 * wij * (ri_wi + p.r0.at(j).dot(vj)) / measure;
        }
    }
    return quad + lin;
}

PdCertificate certify_pd(const QuadFormProblem& p) {
    check_shapes(p);
    const int nn = p.r0.size();
    const int d = p.r0.dim();
    const Eigen::VectorXd& qw = p.r0.grid()->weights();

    PdCertificate cert;
    cert.grid_n = nn;
    cert.k1_spd = true;

    // Per-node symmetric square roots of K1. Any asymmetry is a caller bug
    // (symmetrize first); nonpositive eigenvalues downgrade the verdict.
    std::vector<Eigen::MatrixXd> k1_inv_sqrt(nn);
    for (int i = 0; i < nn; ++i) {
        const Eigen::MatrixXd k1 = p.K1.block(i);
        if (!k1.isApprox(k1.transpose(), 1e-12))
            throw std::invalid_argument("certify_pd: K1 not symmetric; call symmetrize first");
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(k1);
        if (es.eigenvalues().minCoeff() <= 0.0) {
            cert.k1_spd = false;
            k1_inv_sqrt[i] = Eigen::MatrixXd::Zero(d, d);
            continue;
        }
        k1_inv_sqrt[i] = es.eigenvectors() *
                         es.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
                         es.eigenvectors().transpose();
    }

    if (!cert.k1_spd) {
        cert.verdict = PdVerdict::Indefinite;
        cert.min_eigenvalue = std::numeric_limits<double>::quiet_NaN();
        return cert;
    }

    Eigen::MatrixXd M(nn * d, nn * d);
    for (int i = 0; i < nn; ++i)
        for (int j = 0; j < nn; ++j)
            M.block(i * d, j * d, d, d) = std::sqrt(qw[i]) * std::sqrt(qw[j]) *
                                          (k1_inv_sqrt[i] * p.K2.block(i, j) *
                                           k1_inv_sqrt[j]);
    M = 0.5 * (M + M.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M, Eigen::EigenvaluesOnly);
    cert.min_eigenvalue = es.eigenvalues().minCoeff();

    if (cert.min_eigenvalue > -1.0 + kPdMargin)
        cert.verdict = PdVerdict::PositiveDefinite;
    else if (std::abs(cert.min_eigenvalue + 1.0) <= kPdMargin)
        cert.verdict = PdVerdict::PositiveSemiDefinite;
    else
        cert.verdict = PdVerdict::Indefinite;
    return cert;
}

QuadFormSolution minimize(const QuadFormProblem& p_in) {
    const QuadFormProblem p = symmetrize(p_in);
    const int nn = p.r0.size();
    const int d = p.r0.dim();

    QuadFormSolution sol{GridFunction(p.r0.grid(), d), 0.0, certify_pd(p), false, 0, 0};
    sol.stationary_only = sol.certificate.verdict != PdVerdict::PositiveDefinite;

    // Second-kind form: w = -K1^{-1} r0 - Int K1^{-1} K2 w.
    std::vector<Eigen::PartialPivLU<Eigen::MatrixXd>> k1_lu;
    k1_lu.reserve(nn);
    for (int i = 0; i < nn; ++i) {
        Eigen::PartialPivLU<Eigen::MatrixXd> lu(Eigen::MatrixXd(p.K1.block(i)));
        if (lu.rcond() < kSingularRcond)
            throw SingularOperatorError("minimize: K1 not invertible at a node");
        k1_lu.push_back(std::move(lu));
    }

    MatrixKernelField Kt(p.r0.grid(), KernelArity::Two, d, d);
    for (int i = 0; i < nn; ++i)
        for (int j = 0; j < nn; ++j)
            Kt.block(i, j) = k1_lu[i].solve(Eigen::MatrixXd(p.K2.block(i, j)));

    GridFunction g(p.r0.grid(), d);
    for (int i = 0; i < nn; ++i)
        g.values().row(i) = (-k1_lu[i].solve(p.r0.at(i))).transpose();

    sol.w_star = solve_second_kind(Kt, g, -1);
    sol.e_min = eval_E(p, sol.w_star);

    const double half_pairing = 0.5 * inner_product(p.r0, sol.w_star);
    sol.min_value_identity_gap = std::abs(sol.e_min - half_pairing);
    sol.eq_identity_gap = std::abs(sol.e_min + eval_Eq(p, sol.w_star));
    return sol;
}

} // namespace ocie
