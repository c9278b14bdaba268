#include "ocie/fredholm.hpp"

#include <stdexcept>

#include "ocie/errors.hpp"

namespace ocie {

namespace {

void require_square(const MatrixKernelField& K) {
    if (K.arity() != KernelArity::Two)
        throw std::invalid_argument("expected a two-argument kernel");
    if (K.rows() != K.cols())
        throw std::invalid_argument("expected square kernel blocks");
}

Eigen::PartialPivLU<Eigen::MatrixXd> factor_or_throw(const Eigen::MatrixXd& M,
                                                     const char* what) {
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(M);
    if (lu.rcond() < kSingularRcond)
        throw SingularOperatorError(std::string(what) +
                                    ": Nystrom matrix is numerically singular "
                                    "(Fredholm alternative fails at this grid)");
    return lu;
}

// Stacked Nystrom matrix I - sign * K(x_i, x_j) w_j.
Eigen::MatrixXd nystrom_matrix(const MatrixKernelField& K, int sign) {
    const int nn = K.grid()->size();
    const int d = K.rows();
    const Eigen::VectorXd& w = K.grid()->weights();
    Eigen::MatrixXd M = Eigen::MatrixXd::Identity(nn * d, nn * d);
    for (int i = 0; i < nn; ++i)
        for (int j = 0; j < nn; ++j)
            M.block(i * d, j * d, d, d) -= sign * w[j] * K.block(i, j);
    return M;
}

} // namespace

GridFunction solve_second_kind(const MatrixKernelField& K, const GridFunction& g,
                               int sign) {
    require_square(K);
    if (sign != 1 && sign != -1)
        throw std::invalid_argument("sign must be +1 or -1");
    if (!same_grid(*K.grid(), *g.grid()))
        throw std::invalid_argument("solve_second_kind: grid mismatch");
    if (K.cols() != g.dim())
        throw std::invalid_argument("solve_second_kind: shape mismatch");

    const int nn = g.size();
    const int d = g.dim();
    const Eigen::MatrixXd M = nystrom_matrix(K, sign);
    auto lu = factor_or_throw(M, "solve_second_kind");

    Eigen::VectorXd rhs(nn * d);
    for (int i = 0; i < nn; ++i) rhs.segment(i * d, d) = g.values().row(i).transpose();
    Eigen::VectorXd sol = lu.solve(rhs);

    const double residual = (M * sol - rhs).cwiseAbs().maxCoeff();
    if (residual > 1e-10 * (1.0 + g.max_norm()))
        throw SingularOperatorError("solve_second_kind: residual above tolerance, "
                                    "system too ill-conditioned");

    Eigen::MatrixXd out(nn, d);
    for (int i = 0; i < nn; ++i) out.row(i) = sol.segment(i * d, d).transpose();
    return GridFunction(g.grid(), std::move(out));
}

ResolventKernel resolvent(const MatrixKernelField& A) {
    require_square(A);
    const int nn = A.grid()->size();
    const int d = A.rows();
    const Eigen::VectorXd& w = A.grid()->weights();

    // K_ij = A_ij + sum_l A_il w_l K_lj: one factorization, all column
    // blocks solved together.
    const Eigen::MatrixXd M = nystrom_matrix(A, 1);
    auto lu = factor_or_throw(M, "resolvent");
    Eigen::MatrixXd Kdata = lu.solve(A.data());

    MatrixKernelField K(A.grid(), KernelArity::Two, d, d);
    double defect = 0.0;
    {
        Eigen::MatrixXd resid = Kdata - A.data();
        for (int i = 0; i < nn; ++i)
            for (int j = 0; j < nn; ++j) {
                Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(d, d);
                for (int l = 0; l < nn; ++l)
                    acc.noalias() += w[l] * A.block(i, l) * Kdata.block(l * d, j * d, d, d);
                resid.block(i * d, j * d, d, d) -= acc;
                K.block(i, j) = Kdata.block(i * d, j * d, d, d);
            }
        defect = resid.cwiseAbs().maxCoeff();
    }
    return ResolventKernel{A, std::move(K), defect};
}

GridFunction solve_volterra_second_kind(const MatrixKernelField& C,
                                        const GridFunction& g,
                                        VolterraDirection direction) {
    require_square(C);
    if (!same_grid(*C.grid(), *g.grid()))
        throw std::invalid_argument("solve_volterra_second_kind: grid mismatch");
    if (C.cols() != g.dim())
        throw std::invalid_argument("solve_volterra_second_kind: shape mismatch");

    const Grid& grid = *g.grid();
    const int nn = g.size();
    const int d = g.dim();

    Eigen::MatrixXd M = Eigen::MatrixXd::Identity(nn * d, nn * d);
    for (int i = 0; i < nn; ++i) {
        const Eigen::VectorXd wrow = direction == VolterraDirection::Forward
                                         ? grid.causal_weights(i)
                                         : grid.anticausal_weights(i);
        for (int j = 0; j < nn; ++j) {
            if (wrow[j] == 0.0) continue;
            if (direction == VolterraDirection::Forward)
                M.block(i * d, j * d, d, d) -= wrow[j] * C.block(i, j);
            else
                // w(t_i) = g_i + sum_j w_j w(t_j) C(t_j, t_i), rows as covectors
                M.block(i * d, j * d, d, d) -= wrow[j] * C.block(j, i).transpose();
        }
    }
    auto lu = factor_or_throw(M, "solve_volterra_second_kind");

    Eigen::VectorXd rhs(nn * d);
    for (int i = 0; i < nn; ++i) rhs.segment(i * d, d) = g.values().row(i).transpose();
    Eigen::VectorXd sol = lu.solve(rhs);

    Eigen::MatrixXd out(nn, d);
    for (int i = 0; i < nn; ++i) out.row(i) = sol.segment(i * d, d).transpose();
    return GridFunction(g.grid(), std::move(out));
}

} // namespace ocie
