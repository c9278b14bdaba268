#include "ocie/lq_fredholm.hpp"

#include <stdexcept>

#include "ocie/errors.hpp"

namespace ocie {

namespace {

void check_problem(const FredholmLQProblem& p) {
    const int n = p.phi0.dim();
    if (p.A.rows() != n || p.A.cols() != n)
        throw std::invalid_argument("FredholmLQProblem: A must be n x n");
    if (p.B.rows() != n)
        throw std::invalid_argument("FredholmLQProblem: B must be n x m");
    const int m = p.B.cols();
    if (p.P.rows() != n || p.P.cols() != n || p.Q.rows() != n || p.Q.cols() != m ||
        p.R.rows() != m || p.R.cols() != m)
        throw std::invalid_argument("FredholmLQProblem: cost kernel shapes inconsistent");
}

std::vector<Eigen::PartialPivLU<Eigen::MatrixXd>>
factor_R(const MatrixKernelField& R) {
    std::vector<Eigen::PartialPivLU<Eigen::MatrixXd>> lus;
    const int nn = R.grid()->size();
    lus.reserve(nn);
    for (int i = 0; i < nn; ++i) {
        Eigen::PartialPivLU<Eigen::MatrixXd> lu(Eigen::MatrixXd(R.block(i)));
        if (lu.rcond() < kSingularRcond)
            throw std::invalid_argument("R(x) not invertible at node " + std::to_string(i));
        lus.push_back(std::move(lu));
    }
    return lus;
}

} // namespace

ReducedState reduce_state(const FredholmLQProblem& p) {
    check_problem(p);
    const ResolventKernel rk = resolvent(p.A);
    const int nn = p.phi0.size();
    const int n = p.phi0.dim();
    const int m = p.B.cols();
    const Eigen::VectorXd& w = p.phi0.grid()->weights();

    GridFunction phi1 = p.phi0;
    for (int i = 0; i < nn; ++i) {
        Eigen::VectorXd acc = p.phi0.at(i);
        for (int j = 0; j < nn; ++j)
            acc.noalias() += w[j] * (rk.resolvent.block(i, j) * p.phi0.at(j));
        phi1.values().row(i) = acc.transpose();
    }

    MatrixKernelField B1(p.phi0.grid(), KernelArity::Two, n, m);
    for (int i = 0; i < nn; ++i)
        for (int j = 0; j < nn; ++j) {
            Eigen::MatrixXd acc = p.B.block(i, j);
            for (int l = 0; l < nn; ++l)
                acc.noalias() += w[l] * (rk.resolvent.block(i, l) * p.B.block(l, j));
            B1.block(i, j) = acc;
        }
    return ReducedState{std::move(phi1), std::move(B1), rk.residual_norm};
}

ReducedForm assemble_reduced_form(const FredholmLQProblem& p, const ReducedState& rs) {
    check_problem(p);
    const int nn = p.phi0.size();
    const int m = p.B.cols();
    const Eigen::VectorXd& w = p.phi0.grid()->weights();

    MatrixKernelField K2(p.phi0.grid(), KernelArity::Two, m, m);
    for (int i = 0; i < nn; ++i)
        for (int j = 0; j < nn; ++j) {
            Eigen::MatrixXd acc = rs.B1.block(j, i).transpose() * p.Q.block(j) +
                                  p.Q.block(i).transpose() * rs.B1.block(i, j);
            for (int y = 0; y < nn; ++y)
                acc.noalias() += w[y] * (rs.B1.block(y, i).transpose() * p.P.block(y) *
                                         rs.B1.block(y, j));
            K2.block(i, j) = acc;
        }

    GridFunction r(p.phi0.grid(), m);
    for (int i = 0; i < nn; ++i) {
        Eigen::VectorXd acc = p.Q.block(i).transpose() * rs.phi1.at(i);
        for (int y = 0; y < nn; ++y)
            acc.noalias() += w[y] * (rs.B1.block(y, i).transpose() *
                                     (p.P.block(y) * rs.phi1.at(y)));
        r.values().row(i) = acc.transpose();
    }

    double constant = 0.0;
    for (int y = 0; y < nn; ++y)
        constant += 0.5 * w[y] * rs.phi1.at(y).dot(p.P.block(y) * rs.phi1.at(y));

    MatrixKernelField K1(p.phi0.grid(), KernelArity::One, m, m);
    for (int i = 0; i < nn; ++i) K1.block(i) = p.R.block(i);

    return ReducedForm{QuadFormProblem{std::move(K1), std::move(K2), std::move(r)},
                       constant};
}

GridFunction solve_stationarity(const FredholmLQProblem& p, const ReducedState& rs) {
    check_problem(p);
    const int nn = p.phi0.size();
    const int m = p.B.cols();
    const Eigen::VectorXd& w = p.phi0.grid()->weights();
    auto Rlu = factor_R(p.R);

    // Forcing term: R^{-1}(x) [ Q'(x) phi1(x) + Int B1'(z,x) P(z) phi1(z) dz ].
    GridFunction g(p.phi0.grid(), m);
    for (int i = 0; i < nn; ++i) {
        Eigen::VectorXd acc = p.Q.block(i).transpose() * rs.phi1.at(i);
        for (int z = 0; z < nn; ++z)
            acc.noalias() += w[z] * (rs.B1.block(z, i).transpose() *
                                     (p.P.block(z) * rs.phi1.at(z)));
        g.values().row(i) = (-Rlu[i].solve(acc)).transpose();
    }

    // Kernel: R^{-1}(x) [ Q'(x) B1(x,y) + B1'(y,x) Q(y) + Int B1'(z,x) P(z) B1(z,y) dz ],
    // the u-gradient of the cost variation.
    MatrixKernelField Kst(p.phi0.grid(), KernelArity::Two, m, m);
    for (int i = 0; i < nn; ++i)
        for (int j = 0; j < nn; ++j) {
            Eigen::MatrixXd acc = p.Q.block(i).transpose() * rs.B1.block(i, j) +
                                  rs.B1.block(j, i).transpose() * p.Q.block(j);
            for (int z = 0; z < nn; ++z)
                acc.noalias() += w[z] * (rs.B1.block(z, i).transpose() * p.P.block(z) *
                                         rs.B1.block(z, j));
            Kst.block(i, j) = Rlu[i].solve(acc);
        }

    return solve_second_kind(Kst, g, -1);
}

double direct_cost(const FredholmLQProblem& p, const ReducedState& rs,
                   const GridFunction& u) {
    const int nn = p.phi0.size();
    const Eigen::VectorXd& w = p.phi0.grid()->weights();
    GridFunction phi = rs.phi1;
    {
        GridFunction bu = apply_kernel(rs.B1, u);
        phi.values() += bu.values();
    }
    double cost = 0.0;
    for (int i = 0; i < nn; ++i) {
        const Eigen::VectorXd ph = phi.at(i);
        const Eigen::VectorXd ui = u.at(i);
        cost += w[i] * (0.5 * ph.dot(p.P.block(i) * ph) + ph.dot(p.Q.block(i) * ui) +
                        0.5 * ui.dot(p.R.block(i) * ui));
    }
    return cost;
}

LQSolution solve(const FredholmLQProblem& p) {
    check_problem(p);
    const ReducedState rs = reduce_state(p);
    const ReducedForm rf = assemble_reduced_form(p, rs);

    const QuadFormSolution qs = minimize(rf.form);
    GridFunction u = qs.w_star;

    GridFunction state = rs.phi1;
    state.values() += apply_kernel(rs.B1, u).values();

    // Cross-check: residual of the stationarity integral equation at u*.
    double resid = 0.0;
    {
        const int nn = u.size();
        const Eigen::VectorXd& w = p.phi0.grid()->weights();
        auto Rlu = factor_R(p.R);
        for (int i = 0; i < nn; ++i) {
            Eigen::VectorXd acc = p.Q.block(i).transpose() * rs.phi1.at(i);
            for (int z = 0; z < nn; ++z) {
                acc.noalias() += w[z] * (rs.B1.block(z, i).transpose() *
                                         (p.P.block(z) * rs.phi1.at(z)));
                Eigen::MatrixXd kk =
                    p.Q.block(i).transpose() * rs.B1.block(i, z) +
                    rs.B1.block(z, i).transpose() * p.Q.block(z);
                for (int y = 0; y < nn; ++y)
                    kk.noalias() += w[y] * (rs.B1.block(y, i).transpose() * p.P.block(y) *
                                            rs.B1.block(y, z));
                acc.noalias() += w[z] * (kk * u.at(z));
            }
            const Eigen::VectorXd defect = u.at(i) + Rlu[i].solve(acc);
            resid = std::max(resid, defect.cwiseAbs().maxCoeff());
        }
    }

    LQSolution sol{std::move(u), std::move(state), 0.0, resid, qs.certificate,
                   qs.stationary_only};
    sol.cost = direct_cost(p, rs, sol.u_star);
    return sol;
}

} // namespace ocie
