#include "ocie/oracle.hpp"

#include <cmath>
#include <random>
#include <vector>

#include "ocie/errors.hpp"
#include "ocie/expr.hpp"

namespace ocie::oracle {

namespace {

// Composite trapezoid on [t_0, t_i]; row i of the causal rule.
Eigen::VectorXd causal_row(const Grid& grid, int i) {
    const int nn = grid.size();
    Eigen::VectorXd w = Eigen::VectorXd::Zero(nn);
    if (i <= 0) return w;
    w[0] = 0.5 * (grid.node(1) - grid.node(0));
    for (int j = 1; j < i; ++j) w[j] = 0.5 * (grid.node(j + 1) - grid.node(j - 1));
    w[i] = 0.5 * (grid.node(i) - grid.node(i - 1));
    return w;
}

// Dense solve of the discretized state dynamics phi = phi0 + L phi + Lb u
// where L stacks row-weighted kernel samples (full rows for Fredholm,
// causal rows for Volterra).
Eigen::VectorXd eliminate_state(const Grid& grid, int n, int m, const Kernel2& A,
                                const Kernel2& B, const VecFn& g, bool causal,
                                Eigen::MatrixXd* T_out) {
    const int nn = grid.size();
    Eigen::MatrixXd L = Eigen::MatrixXd::Identity(nn * n, nn * n);
    Eigen::MatrixXd Lb = Eigen::MatrixXd::Zero(nn * n, nn * m);
    Eigen::VectorXd g0(nn * n);
    for (int i = 0; i < nn; ++i) {
        g0.segment(i * n, n) = g(grid.node(i));
        const Eigen::VectorXd row =
            causal ? causal_row(grid, i) : Eigen::VectorXd(grid.weights());
        for (int j = 0; j < nn; ++j) {
            if (row[j] == 0.0) continue;
            L.block(i * n, j * n, n, n) -= row[j] * A(grid.node(i), grid.node(j));
            Lb.block(i * n, j * m, n, m) = row[j] * B(grid.node(i), grid.node(j));
        }
    }
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(L);
    if (lu.rcond() < 1e-12)
        throw SingularOperatorError("oracle: discretized dynamics are singular");
    if (T_out) *T_out = lu.solve(Lb);
    return lu.solve(g0);
}

DiscreteQP qp_from_affine_state(const Grid& grid, int n, int m,
                                const Eigen::VectorXd& phi1, const Eigen::MatrixXd& T,
                                const Kernel1& P, const Kernel1& Q, const Kernel1& R) {
    const int nn = grid.size();
    Eigen::MatrixXd DP = Eigen::MatrixXd::Zero(nn * n, nn * n);
    Eigen::MatrixXd DQ = Eigen::MatrixXd::Zero(nn * n, nn * m);
    Eigen::MatrixXd DR = Eigen::MatrixXd::Zero(nn * m, nn * m);
    for (int i = 0; i < nn; ++i) {
        const double t = grid.node(i);
        const double w = grid.weight(i);
        DP.block(i * n, i * n, n, n) = w * P(t);
        DQ.block(i * n, i * m, n, m) = w * Q(t);
        DR.block(i * m, i * m, m, m) = w * R(t);
    }
    DiscreteQP qp;
    qp.n_nodes = nn;
    qp.m = m;
    qp.H = T.transpose() * DP * T + T.transpose() * DQ + DQ.transpose() * T + DR;
    qp.H = 0.5 * (qp.H + qp.H.transpose()).eval();
    qp.r = T.transpose() * (DP * phi1) + DQ.transpose() * phi1;
    qp.c0 = 0.5 * phi1.dot(DP * phi1);
    return qp;
}

double running_cost(const Grid& grid, int n, int m, const Kernel1& P, const Kernel1& Q,
                    const Kernel1& R, const Eigen::VectorXd& phi,
                    const Eigen::VectorXd& u) {
    double cost = 0.0;
    for (int i = 0; i < grid.size(); ++i) {
        const double t = grid.node(i);
        const Eigen::VectorXd ph = phi.segment(i * n, n);
        const Eigen::VectorXd ui = u.segment(i * m, m);
        cost += grid.weight(i) * (0.5 * ph.dot(P(t) * ph) + ph.dot(Q(t) * ui) +
                                  0.5 * ui.dot(R(t) * ui));
    }
    return cost;
}

// Spec kernels as plain pointwise samplers.
Eigen::MatrixXd eval_cells(const ExprMatrix& e, EvalEnv& env) {
    Eigen::MatrixXd out(e.rows, e.cols);
    for (int r = 0; r < e.rows; ++r)
        for (int c = 0; c < e.cols; ++c) out(r, c) = eval(*e.at(r, c), env);
    return out;
}

Kernel1 sampler1(const ProblemSpec& spec, const char* role, const char* var) {
    const ExprMatrix& e = spec.kernels.at(role);
    return [&e, var = std::string(var)](double x) {
        EvalEnv env;
        env.set(var, x);
        return eval_cells(e, env);
    };
}

Kernel2 sampler2(const ProblemSpec& spec, const char* role, const char* v1,
                 const char* v2) {
    const ExprMatrix& e = spec.kernels.at(role);
    return [&e, v1 = std::string(v1), v2 = std::string(v2)](double x, double y) {
        EvalEnv env;
        env.set(v1, x);
        env.set(v2, y);
        return eval_cells(e, env);
    };
}

VecFn vec_sampler(const ProblemSpec& spec, const char* role, const char* var) {
    Kernel1 k = sampler1(spec, role, var);
    return [k](double x) { return Eigen::VectorXd(k(x).col(0)); };
}

} // namespace

DiscreteQP assemble_qp_quadform(const Grid& grid, int n, const Kernel1& K1,
                                const Kernel2& K2, const VecFn& r0) {
    const int nn = grid.size();
    DiscreteQP qp;
    qp.n_nodes = nn;
    qp.m = n;
    qp.H = Eigen::MatrixXd::Zero(nn * n, nn * n);
    qp.r.resize(nn * n);
    for (int i = 0; i < nn; ++i) {
        const double wi = grid.weight(i);
        qp.H.block(i * n, i * n, n, n) += wi * K1(grid.node(i));
        qp.r.segment(i * n, n) = wi * r0(grid.node(i));
        for (int j = 0; j < nn; ++j)
            qp.H.block(i * n, j * n, n, n) +=
                wi * grid.weight(j) * K2(grid.node(i), grid.node(j));
    }
    qp.H = 0.5 * (qp.H + qp.H.transpose()).eval();
    return qp;
}

DiscreteQP assemble_qp_fredholm(const Grid& grid, int n, int m, const Kernel2& A,
                                const Kernel2& B, const VecFn& phi0, const Kernel1& P,
                                const Kernel1& Q, const Kernel1& R) {
    Eigen::MatrixXd T;
    const Eigen::VectorXd phi1 = eliminate_state(grid, n, m, A, B, phi0, false, &T);
    return qp_from_affine_state(grid, n, m, phi1, T, P, Q, R);
}

DiscreteQP assemble_qp_volterra(const Grid& grid, int n, int m, const Kernel2& A,
                                const Kernel2& B, const VecFn& y0, const Kernel1& P,
                                const Kernel1& Q, const Kernel1& R) {
    Eigen::MatrixXd T;
    const Eigen::VectorXd y1 = eliminate_state(grid, n, m, A, B, y0, true, &T);
    return qp_from_affine_state(grid, n, m, y1, T, P, Q, R);
}

DiscreteQP assemble_qp(const ProblemSpec& spec, const Grid& grid) {
    switch (spec.kind) {
    case ProblemKind::QuadForm:
        return assemble_qp_quadform(grid, spec.n, sampler1(spec, "K1", "x"),
                                    sampler2(spec, "K2", "x", "y"),
                                    vec_sampler(spec, "r0", "x"));
    case ProblemKind::FredholmLQ:
        return assemble_qp_fredholm(grid, spec.n, spec.m, sampler2(spec, "A", "x", "y"),
                                    sampler2(spec, "B", "x", "y"),
                                    vec_sampler(spec, "phi0", "x"),
                                    sampler1(spec, "P", "x"), sampler1(spec, "Q", "x"),
                                    sampler1(spec, "R", "x"));
    case ProblemKind::VolterraLQ:
        return assemble_qp_volterra(grid, spec.n, spec.m, sampler2(spec, "A", "t", "s"),
                                    sampler2(spec, "B", "t", "s"),
                                    vec_sampler(spec, "y0", "t"),
                                    sampler1(spec, "P", "t"), sampler1(spec, "Q", "t"),
                                    sampler1(spec, "R", "t"));
    case ProblemKind::NonlinearFredholm:
        throw ValidationError("oracle QP assembly is only defined for quadratic kinds");
    }
    throw ValidationError("bad kind");
}

QpResult qp_minimize(const DiscreteQP& qp) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(qp.H);
    const double scale = std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
    QpResult res;
    res.hessian_pd = es.eigenvalues().minCoeff() > 1e-12 * scale;

    Eigen::PartialPivLU<Eigen::MatrixXd> lu(qp.H);
    if (lu.rcond() < 1e-14)
        throw SingularOperatorError("oracle: QP Hessian is singular");
    res.u = lu.solve(-qp.r);
    res.value = 0.5 * res.u.dot(qp.H * res.u) + qp.r.dot(res.u) + qp.c0;
    return res;
}

Eigen::VectorXd fd_gradient(const std::function<double(const Eigen::VectorXd&)>& cost,
                            const Eigen::VectorXd& u, double step) {
    Eigen::VectorXd g(u.size());
    Eigen::VectorXd v = u;
    for (int i = 0; i < u.size(); ++i) {
        const double save = v[i];
        v[i] = save + step;
        const double hi = cost(v);
        v[i] = save - step;
        const double lo = cost(v);
        v[i] = save;
        g[i] = (hi - lo) / (2.0 * step);
    }
    return g;
}

double direct_cost_fredholm(const Grid& grid, int n, int m, const Kernel2& A,
                            const Kernel2& B, const VecFn& phi0, const Kernel1& P,
                            const Kernel1& Q, const Kernel1& R,
                            const Eigen::VectorXd& u_stacked) {
    Eigen::MatrixXd T;
    const Eigen::VectorXd phi1 = eliminate_state(grid, n, m, A, B, phi0, false, &T);
    return running_cost(grid, n, m, P, Q, R, phi1 + T * u_stacked, u_stacked);
}

double direct_cost_volterra(const Grid& grid, int n, int m, const Kernel2& A,
                            const Kernel2& B, const VecFn& y0, const Kernel1& P,
                            const Kernel1& Q, const Kernel1& R,
                            const Eigen::VectorXd& u_stacked) {
    Eigen::MatrixXd T;
    const Eigen::VectorXd y1 = eliminate_state(grid, n, m, A, B, y0, true, &T);
    return running_cost(grid, n, m, P, Q, R, y1 + T * u_stacked, u_stacked);
}

double direct_cost_nonlinear(const Grid& grid, const NonlinearSamplers& s,
                             const Eigen::VectorXd& u_stacked) {
    const int nn = grid.size();
    const int n = s.n;
    Eigen::VectorXd phi(nn * n);
    for (int i = 0; i < nn; ++i) phi.segment(i * n, n) = s.phi0(grid.node(i));

    std::vector<double> history;
    bool converged = false;
    for (int iter = 0; iter < 500; ++iter) {
        Eigen::VectorXd next(nn * n);
        for (int i = 0; i < nn; ++i) {
            Eigen::VectorXd acc = s.phi0(grid.node(i));
            for (int j = 0; j < nn; ++j) {
                const Eigen::VectorXd phij = phi.segment(j * n, n);
                acc += grid.weight(j) *
                       (s.f(grid.node(i), grid.node(j), phij) +
                        s.F(grid.node(i), grid.node(j), phij) *
                            u_stacked.segment(j * s.m, s.m));
            }
            next.segment(i * n, n) = acc;
        }
        const double res = (next - phi).cwiseAbs().maxCoeff();
        history.push_back(res);
        phi = next;
        if (res <= 1e-12) {
            converged = true;
            break;
        }
    }
    if (!converged)
        throw NonConvergenceError("oracle: nonlinear state iteration stalled", history);

    double cost = 0.0;
    for (int i = 0; i < nn; ++i) {
        const double x = grid.node(i);
        const Eigen::VectorXd ph = phi.segment(i * n, n);
        const Eigen::VectorXd ui = u_stacked.segment(i * s.m, s.m);
        cost += grid.weight(i) *
                (s.g0(x, ph) + s.g1(x, ph).dot(ui) + 0.5 * ui.dot(s.G(x, ph) * ui));
    }
    return cost;
}

double descent_probe(const std::function<double(const Eigen::VectorXd&)>& cost,
                     Eigen::VectorXd u, int iterations, double fd_step) {
    double f = cost(u);
    double gnorm = 0.0;
    for (int it = 0; it < iterations; ++it) {
        const Eigen::VectorXd g = fd_gradient(cost, u, fd_step);
        gnorm = g.cwiseAbs().maxCoeff();
        if (gnorm < 1e-9) break;
        double step = 1.0;
        bool moved = false;
        for (int bt = 0; bt < 40; ++bt) {
            const Eigen::VectorXd trial = u - step * g;
            const double ft = cost(trial);
            if (ft < f - 1e-12 * std::abs(f)) {
                u = trial;
                f = ft;
                moved = true;
                break;
            }
            step *= 0.5;
        }
        if (!moved) break;
    }
    return gnorm;
}

} // namespace ocie::oracle
