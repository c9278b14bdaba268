#include "ocie/lq_volterra.hpp"

#include <stdexcept>
#include <vector>

#include "ocie/errors.hpp"

namespace ocie {

namespace {

void check_problem(const VolterraLQProblem& p) {
    const int n = p.y0.dim();
    if (p.A.rows() != n || p.A.cols() != n)
        throw std::invalid_argument("VolterraLQProblem: A must be n x n");
    if (p.B.rows() != n)
        throw std::invalid_argument("VolterraLQProblem: B must be n x m");
    const int m = p.B.cols();
    if (p.P.rows() != n || p.P.cols() != n || p.Q.rows() != n || p.Q.cols() != m ||
        p.R.rows() != m || p.R.cols() != m)
        throw std::invalid_argument("VolterraLQProblem: cost kernel shapes inconsistent");
    if (p.y0.grid()->rule() != QuadratureRule::Trapezoid)
        throw ValidationError("volterra_lq requires the trapezoid rule");
}

std::vector<Eigen::MatrixXd> invert_R(const MatrixKernelField& R) {
    const int nn = R.grid()->size();
    std::vector<Eigen::MatrixXd> inv;
    inv.reserve(nn);
    for (int i = 0; i < nn; ++i) {
        Eigen::PartialPivLU<Eigen::MatrixXd> lu(Eigen::MatrixXd(R.block(i)));
        if (lu.rcond() < kSingularRcond)
            throw std::invalid_argument("R(t) not invertible at node " + std::to_string(i));
        inv.push_back(lu.inverse());
    }
    return inv;
}

// Causal trapezoid weights, one row per upper endpoint.
Eigen::MatrixXd causal_matrix(const Grid& grid) {
    const int nn = grid.size();
    Eigen::MatrixXd wc(nn, nn);
    for (int i = 0; i < nn; ++i) wc.row(i) = grid.causal_weights(i).transpose();
    return wc;
}

struct Assembled {
    Eigen::MatrixXd Cc;   // state coupling, blocks wc_ij C'(t_i, t_j)
    Eigen::MatrixXd Km;   // blocks w_s K1'(t_i, t_s)
    Eigen::MatrixXd Ahat; // adjoint-weighted costate coupling
    Eigen::MatrixXd Dblk; // block diagonal P - Q R^{-1} Q'
    Eigen::VectorXd Y0;
    Eigen::MatrixXd wc;
    std::vector<Eigen::MatrixXd> Rinv;
};

// The discrete operators below are the exact first-order conditions of the
// trapezoid-discretized problem: the costate picks up the adjoint weights
// wh(k,i) = wc(i,k) w_i / w_k of the causal state quadrature.
Assembled assemble(const VolterraLQProblem& p, const VolterraDerived& d) {
    const Grid& grid = *p.y0.grid();
    const int nn = grid.size();
    const int n = p.y0.dim();
    const Eigen::VectorXd& w = grid.weights();

    Assembled a;
    a.wc = causal_matrix(grid);
    a.Rinv = invert_R(p.R);

    a.Cc.setZero(nn * n, nn * n);
    a.Km.setZero(nn * n, nn * n);
    a.Ahat.setZero(nn * n, nn * n);
    a.Dblk.setZero(nn * n, nn * n);
    a.Y0.resize(nn * n);

    for (int i = 0; i < nn; ++i) {
        a.Y0.segment(i * n, n) = p.y0.at(i);
        const Eigen::MatrixXd Qi = p.Q.block(i);
        a.Dblk.block(i * n, i * n, n, n) =
            Eigen::MatrixXd(p.P.block(i)) - Qi * a.Rinv[i] * Qi.transpose();
        for (int j = 0; j < nn; ++j) {
            if (a.wc(i, j) != 0.0)
                a.Cc.block(i * n, j * n, n, n) =
                    a.wc(i, j) * d.C.block(i, j).transpose();
            a.Km.block(i * n, j * n, n, n) = w[j] * d.K1.block(i, j).transpose();
            const double wh = a.wc(j, i) * w[j] / w[i]; // wh(i <- j)
            if (wh != 0.0)
                a.Ahat.block(i * n, j * n, n, n) =
                    wh * (p.A.block(j, i).transpose() -
                          Qi * a.Rinv[i] * p.B.block(j, i).transpose());
        }
    }
    return a;
}

VolterraSolution finish(const VolterraLQProblem& p, const Assembled& a,
                        const Eigen::VectorXd& Y, const Eigen::VectorXd& Psi) {
    const Grid& grid = *p.y0.grid();
    const int nn = grid.size();
    const int n = p.y0.dim();
    const int m = p.B.cols();
    const Eigen::VectorXd& w = grid.weights();

    GridFunction y(p.y0.grid(), n);
    GridFunction psi(p.y0.grid(), n);
    GridFunction u(p.y0.grid(), m);

    for (int k = 0; k < nn; ++k) {
        y.values().row(k) = Y.segment(k * n, n).transpose();
        psi.values().row(k) = Psi.segment(k * n, n).transpose();
    }
    for (int k = 0; k < nn; ++k) {
        Eigen::VectorXd acc = p.Q.block(k).transpose() * y.at(k);
        for (int i = 0; i < nn; ++i) {
            const double wh = a.wc(i, k) * w[i] / w[k];
            if (wh != 0.0)
                acc.noalias() += wh * (p.B.block(i, k).transpose() * psi.at(i));
        }
        u.values().row(k) = (-(a.Rinv[k] * acc)).transpose();
    }

    double stat = 0.0, costate = 0.0;
    for (int k = 0; k < nn; ++k) {
        Eigen::VectorXd grad = p.Q.block(k).transpose() * y.at(k) +
                               p.R.block(k) * u.at(k);
        Eigen::VectorXd cdef = psi.at(k) - p.P.block(k) * y.at(k) -
                               p.Q.block(k) * u.at(k);
        for (int i = 0; i < nn; ++i) {
            const double wh = a.wc(i, k) * w[i] / w[k];
            if (wh == 0.0) continue;
            grad.noalias() += wh * (p.B.block(i, k).transpose() * psi.at(i));
            cdef.noalias() -= wh * (p.A.block(i, k).transpose() * psi.at(i));
        }
        stat = std::max(stat, grad.cwiseAbs().maxCoeff());
        costate = std::max(costate, cdef.cwiseAbs().maxCoeff());
    }

    VolterraSolution sol{std::move(u), std::move(y), std::move(psi), 0.0, 0.0,
                         stat, costate};
    sol.cost = volterra_cost(p, sol.y_star, sol.u_star);
    return sol;
}

} // namespace

VolterraDerived derived_kernels(const VolterraLQProblem& p, bool printed_k1) {
    check_problem(p);
    const Grid& grid = *p.y0.grid();
    const int nn = grid.size();
    const int n = p.y0.dim();
    const Eigen::MatrixXd wc = causal_matrix(grid);
    const Eigen::VectorXd& w = grid.weights();
    const auto Rinv = invert_R(p.R);

    VolterraDerived d{MatrixKernelField(p.y0.grid(), KernelArity::Two, n, n),
                      MatrixKernelField(p.y0.grid(), KernelArity::Two, n, n),
                      printed_k1};

    for (int i = 0; i < nn; ++i)
        for (int j = 0; j < nn; ++j) {
            d.C.block(i, j) = p.A.block(i, j).transpose() -
                              p.Q.block(j) * Rinv[j] * p.B.block(i, j).transpose();
            // K1(t_a, t_b) = Int_0^{min} B(t_b, s) R^{-1}(s) B'(t_a, s) ds with
            // the product of the two causal weight rows; the printed variant
            // freezes the first factor's second argument at t_a.
            Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(n, n);
            for (int s = 0; s < nn; ++s) {
                const double ww = wc(i, s) * wc(j, s) / w[s];
                if (ww == 0.0) continue;
                const Eigen::MatrixXd Bj =
                    printed_k1 ? Eigen::MatrixXd(p.B.block(j, i)) : Eigen::MatrixXd(p.B.block(j, s));
                acc.noalias() += ww * (Bj * Rinv[s] * p.B.block(i, s).transpose());
            }
            d.K1.block(i, j) = acc;
        }
    return d;
}

VolterraSolution solve_joint(const VolterraLQProblem& p, const VolterraDerived& d) {
    check_problem(p);
    const Assembled a = assemble(p, d);
    const int N = static_cast<int>(a.Y0.size());

    Eigen::MatrixXd M(2 * N, 2 * N);
    M.topLeftCorner(N, N) = Eigen::MatrixXd::Identity(N, N) - a.Cc;
    M.topRightCorner(N, N) = a.Km;
    M.bottomLeftCorner(N, N) = -a.Dblk;
    M.bottomRightCorner(N, N) = Eigen::MatrixXd::Identity(N, N) - a.Ahat;

    Eigen::VectorXd rhs(2 * N);
    rhs.head(N) = a.Y0;
    rhs.tail(N).setZero();

    Eigen::PartialPivLU<Eigen::MatrixXd> lu(M);
    if (lu.rcond() < kSingularRcond)
        throw SingularOperatorError("joint state/costate system is singular");
    const Eigen::VectorXd sol = lu.solve(rhs);
    return finish(p, a, sol.head(N), sol.tail(N));
}

VolterraSolution solve_resolvent_path(const VolterraLQProblem& p,
                                      const VolterraDerived& d) {
    check_problem(p);
    const Assembled a = assemble(p, d);
    const int N = static_cast<int>(a.Y0.size());
    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(N, N);

    // Discrete Volterra resolvent of the eliminated state kernel.
    Eigen::PartialPivLU<Eigen::MatrixXd> state_lu(I - a.Cc);
    if (state_lu.rcond() < kSingularRcond)
        throw SingularOperatorError("eliminated Volterra state operator is singular");
    const Eigen::MatrixXd IplusM = I + Eigen::MatrixXd(state_lu.solve(a.Cc));

    // Costate alone: (I - Ahat + D (I + M) K) Psi = D (I + M) Y0.
    Eigen::MatrixXd lhs = I - a.Ahat + a.Dblk * IplusM * a.Km;
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(lhs);
    if (lu.rcond() < kSingularRcond)
        throw SingularOperatorError("eliminated costate system is singular");
    const Eigen::VectorXd Psi = lu.solve(a.Dblk * (IplusM * a.Y0));
    const Eigen::VectorXd Y = IplusM * (a.Y0 - a.Km * Psi);
    return finish(p, a, Y, Psi);
}

VolterraSolution solve(const VolterraLQProblem& p) {
    const VolterraDerived d = derived_kernels(p);
    VolterraSolution joint = solve_joint(p, d);
    const VolterraSolution alt = solve_resolvent_path(p, d);
    joint.path_agreement =
        (joint.u_star.values() - alt.u_star.values()).cwiseAbs().maxCoeff();
    return joint;
}

double volterra_cost(const VolterraLQProblem& p, const GridFunction& y,
                     const GridFunction& u) {
    const Grid& grid = *p.y0.grid();
    double cost = 0.0;
    for (int k = 0; k < grid.size(); ++k) {
        const Eigen::VectorXd yk = y.at(k);
        const Eigen::VectorXd uk = u.at(k);
        cost += grid.weight(k) * (0.5 * yk.dot(p.P.block(k) * yk) +
                                  yk.dot(p.Q.block(k) * uk) +
                                  0.5 * uk.dot(p.R.block(k) * uk));
    }
    return cost;
}

} // namespace ocie
