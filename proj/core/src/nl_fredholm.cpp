#include "ocie/nl_fredholm.hpp"

#include <cmath>
#include <random>

#include "ocie/errors.hpp"
#include "ocie/fredholm.hpp"

namespace ocie {

namespace {

Eigen::VectorXd solve_G_or_throw(const Eigen::MatrixXd& G, const Eigen::VectorXd& rhs,
                                 double x) {
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(G);
    if (lu.rcond() < kSingularRcond)
        throw SingularOperatorError("G(x, phi) singular at x = " + std::to_string(x));
    return lu.solve(rhs);
}

// u at every node for the current (phi, psi) iterate.
Eigen::MatrixXd controls(const NonlinearFredholmProblem& p, const GridFunction& phi,
                         const GridFunction& psi) {
    const Grid& grid = *p.phi0.grid();
    const int nn = grid.size();
    Eigen::MatrixXd u(nn, p.m);
    for (int k = 0; k < nn; ++k) {
        const double x = grid.node(k);
        const Eigen::VectorXd phik = phi.at(k);
        Eigen::VectorXd rhs = p.g1(x, phik);
        for (int j = 0; j < nn; ++j)
            rhs.noalias() += grid.weight(j) * (p.F(grid.node(j), x, phik).transpose() *
                                               psi.at(j));
        u.row(k) = (-solve_G_or_throw(p.G(x, phik), rhs, x)).transpose();
    }
    return u;
}

} // namespace

double hamiltonian(double x, const Eigen::VectorXd& phi_at_x,
                   const Eigen::VectorXd& u_at_x, const GridFunction& psi,
                   const NonlinearFredholmProblem& p) {
    const Grid& grid = *p.phi0.grid();
    double h = p.g0(x, phi_at_x) + p.g1(x, phi_at_x).dot(u_at_x) +
               0.5 * u_at_x.dot(p.G(x, phi_at_x) * u_at_x);
    for (int j = 0; j < grid.size(); ++j) {
        const double y = grid.node(j);
        h += grid.weight(j) *
             psi.at(j).dot(p.f(y, x, phi_at_x) + p.F(y, x, phi_at_x) * u_at_x);
    }
    return h;
}

Eigen::VectorXd control_from_costate(double x, const Eigen::VectorXd& phi_at_x,
                                     const GridFunction& psi,
                                     const NonlinearFredholmProblem& p) {
    const Grid& grid = *p.phi0.grid();
    Eigen::VectorXd rhs = p.g1(x, phi_at_x);
    for (int j = 0; j < grid.size(); ++j)
        rhs.noalias() += grid.weight(j) *
                         (p.F(grid.node(j), x, phi_at_x).transpose() * psi.at(j));
    return -solve_G_or_throw(p.G(x, phi_at_x), rhs, x);
}

void validate_gradients(const NonlinearFredholmProblem& p, int samples, unsigned seed,
                        double rel_tol) {
    const Grid& grid = *p.phi0.grid();
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> coord(grid.a(), grid.b());
    std::uniform_real_distribution<double> state(-1.0, 1.0);

    auto check = [&](double got, double fd, const char* what) {
        const double scale = 1.0 + std::abs(fd);
        if (std::abs(got - fd) > rel_tol * scale)
            throw ValidationError(std::string("gradient expression for ") + what +
                                  " disagrees with finite differences: got " +
                                  std::to_string(got) + ", expected " + std::to_string(fd));
    };

    for (int s = 0; s < samples; ++s) {
        const double x = coord(rng);
        const double y = coord(rng);
        Eigen::VectorXd phi(p.n);
        for (int j = 0; j < p.n; ++j) phi[j] = state(rng);

        for (int j = 0; j < p.n; ++j) {
            const double step = 1e-6 * (1.0 + std::abs(phi[j]));
            Eigen::VectorXd hi = phi, lo = phi;
            hi[j] += step;
            lo[j] -= step;
            const double inv = 1.0 / (2.0 * step);

            const Eigen::MatrixXd df = (p.f(x, y, hi) - p.f(x, y, lo)) * inv;
            const Eigen::MatrixXd gf = p.grad_f(x, y, phi);
            for (int i = 0; i < p.n; ++i) check(gf(i, j), df(i), "f");

            const Eigen::MatrixXd dF = (p.F(x, y, hi) - p.F(x, y, lo)) * inv;
            const Eigen::MatrixXd gF = p.grad_F(x, y, phi)[j];
            for (int i = 0; i < p.n; ++i)
                for (int c = 0; c < p.m; ++c) check(gF(i, c), dF(i, c), "F");

            check(p.grad_g0(x, phi)[j], (p.g0(x, hi) - p.g0(x, lo)) * inv, "g0");

            const Eigen::VectorXd dg1 = (p.g1(x, hi) - p.g1(x, lo)) * inv;
            const Eigen::MatrixXd gg1 = p.grad_g1(x, phi);
            for (int k = 0; k < p.m; ++k) check(gg1(k, j), dg1[k], "g1");

            const Eigen::MatrixXd dG = (p.G(x, hi) - p.G(x, lo)) * inv;
            const Eigen::MatrixXd gG = p.grad_G(x, phi)[j];
            for (int a = 0; a < p.m; ++a)
                for (int b = 0; b < p.m; ++b) check(gG(a, b), dG(a, b), "G");
        }
    }
}

CoupledSolution solve_coupled(const NonlinearFredholmProblem& p,
                              const PicardSettings& settings) {
    if (settings.damping <= 0.0 || settings.damping > 1.0)
        throw std::invalid_argument("damping must lie in (0, 1]");
    const Grid& grid = *p.phi0.grid();
    const int nn = grid.size();
    const double theta = settings.damping;

    GridFunction phi = p.phi0;
    GridFunction psi(p.phi0.grid(), p.n);
    std::vector<double> history;

    double res_phi = 0.0, res_psi = 0.0;
    Eigen::MatrixXd u(nn, p.m);
    for (int iter = 0; iter < settings.max_iter; ++iter) {
        u = controls(p, phi, psi);

        // State equation with the pointwise optimal control substituted in.
        Eigen::MatrixXd phi_rhs(nn, p.n);
        for (int i = 0; i < nn; ++i) {
            Eigen::VectorXd acc = p.phi0.at(i);
            const double xi = grid.node(i);
            for (int j = 0; j < nn; ++j) {
                const double yj = grid.node(j);
                const Eigen::VectorXd phij = phi.at(j);
                acc.noalias() += grid.weight(j) *
                                 (p.f(xi, yj, phij) +
                                  p.F(xi, yj, phij) * u.row(j).transpose());
            }
            phi_rhs.row(i) = acc.transpose();
        }

        // Costate equation psi = grad_phi H with the same control.
        Eigen::MatrixXd psi_rhs(nn, p.n);
        for (int k = 0; k < nn; ++k) {
            const double xk = grid.node(k);
            const Eigen::VectorXd phik = phi.at(k);
            const Eigen::VectorXd uk = u.row(k).transpose();

            Eigen::RowVectorXd row = p.grad_g0(xk, phik);
            row.noalias() += uk.transpose() * p.grad_g1(xk, phik);

            const auto gG = p.grad_G(xk, phik);
            for (int j = 0; j < p.n; ++j) row[j] += 0.5 * uk.dot(gG[j] * uk);

            for (int j = 0; j < nn; ++j) {
                const double yj = grid.node(j);
                const Eigen::RowVectorXd psij = psi.at(j).transpose();
                row.noalias() += grid.weight(j) * (psij * p.grad_f(yj, xk, phik));
                const auto gF = p.grad_F(yj, xk, phik);
                for (int l = 0; l < p.n; ++l)
                    row[l] += grid.weight(j) * psij.dot((gF[l] * uk).transpose());
            }
            psi_rhs.row(k) = row;
        }

        res_phi = (phi.values() - phi_rhs).cwiseAbs().maxCoeff();
        res_psi = (psi.values() - psi_rhs).cwiseAbs().maxCoeff();
        history.push_back(std::max(res_phi, res_psi));
        if (res_phi <= settings.tol && res_psi <= settings.tol) {
            CoupledIterate it{phi, psi, res_phi, res_psi, iter};
            GridFunction u_star(p.phi0.grid(), Eigen::MatrixXd(u));
            CoupledSolution sol{std::move(it), std::move(u_star), 0.0, 0.0};
            sol.cost = nl_cost(p, phi, sol.u_star);

            // Independent check: stationarity g1' + u'G + Int psi F = 0.
            double stat = 0.0;
            for (int k = 0; k < nn; ++k) {
                const double xk = grid.node(k);
                const Eigen::VectorXd phik = phi.at(k);
                const Eigen::VectorXd uk = sol.u_star.at(k);
                Eigen::RowVectorXd lhs = p.g1(xk, phik).transpose() +
                                         uk.transpose() * p.G(xk, phik);
                for (int j = 0; j < nn; ++j)
                    lhs.noalias() += grid.weight(j) * (psi.at(j).transpose() *
                                                       p.F(grid.node(j), xk, phik));
                stat = std::max(stat, lhs.cwiseAbs().maxCoeff());
            }
            sol.stationarity_residual = stat;
            return sol;
        }

        phi.values() = (1.0 - theta) * phi.values() + theta * phi_rhs;
        psi.values() = (1.0 - theta) * psi.values() + theta * psi_rhs;
    }
    throw NonConvergenceError("coupled state/costate iteration exceeded max_iter (last "
                              "residual " + std::to_string(history.back()) + ")",
                              history);
}

double nl_cost(const NonlinearFredholmProblem& p, const GridFunction& phi,
               const GridFunction& u) {
    const Grid& grid = *p.phi0.grid();
    double cost = 0.0;
    for (int i = 0; i < grid.size(); ++i) {
        const double x = grid.node(i);
        const Eigen::VectorXd phii = phi.at(i);
        const Eigen::VectorXd ui = u.at(i);
        cost += grid.weight(i) * (p.g0(x, phii) + p.g1(x, phii).dot(ui) +
                                  0.5 * ui.dot(p.G(x, phii) * ui));
    }
    return cost;
}

} // namespace ocie
