#pragma once

#include <functional>
#include <vector>

#include "ocie/grid_function.hpp"

namespace ocie {

/// State-nonlinear, control-affine Fredholm control problem:
///   phi(x) = phi0(x) + Int { f(x,y,phi(y)) + F(x,y,phi(y)) u(y) } dy
///   J = Int { g0(x,phi) + g1'(x,phi) u + 1/2 u' G(x,phi) u } dx.
/// Kernel families are callables; gradients with respect to the state are
/// supplied by the user and validated against finite differences before any
/// iteration runs. Rank-3 gradients are stored as one matrix per state
/// component: grad_F(x,y,phi)[j](i,k) = d F(i,k) / d phi_j.
struct NonlinearFredholmProblem {
    int n = 1; // state dimension
    int m = 1; // control dimension
    GridFunction phi0;

    std::function<Eigen::VectorXd(double, double, const Eigen::VectorXd&)> f;
    std::function<Eigen::MatrixXd(double, double, const Eigen::VectorXd&)> F;
    std::function<double(double, const Eigen::VectorXd&)> g0;
    std::function<Eigen::VectorXd(double, const Eigen::VectorXd&)> g1;
    std::function<Eigen::MatrixXd(double, const Eigen::VectorXd&)> G;

    std::function<Eigen::MatrixXd(double, double, const Eigen::VectorXd&)> grad_f;
    std::function<std::vector<Eigen::MatrixXd>(double, double, const Eigen::VectorXd&)> grad_F;
    std::function<Eigen::RowVectorXd(double, const Eigen::VectorXd&)> grad_g0;
    std::function<Eigen::MatrixXd(double, const Eigen::VectorXd&)> grad_g1; // (k,j) = d g1_k / d phi_j
    std::function<std::vector<Eigen::MatrixXd>(double, const Eigen::VectorXd&)> grad_G;
};

struct CoupledIterate {
    GridFunction phi;
    GridFunction psi; // rows are covectors
    double residual_phi = 0.0;
    double residual_psi = 0.0;
    int iteration = 0;
};

struct PicardSettings {
    double tol = 1e-10;
    int max_iter = 200;
    double damping = 1.0; // theta in (0, 1]
};

struct CoupledSolution {
    CoupledIterate iterate;
    GridFunction u_star;
    double cost = 0.0;
    double stationarity_residual = 0.0; // max-norm of g1' + u'G + Int psi F
};

/// Hamiltonian at a point: g0 + g1'u + 1/2 u'Gu + Int psi(y)[f(y,x,phi)+F(y,x,phi)u] dy.
double hamiltonian(double x, const Eigen::VectorXd& phi_at_x,
                   const Eigen::VectorXd& u_at_x, const GridFunction& psi,
                   const NonlinearFredholmProblem& p);

/// Pointwise optimal control u*(x) = -G^{-1}[g1 + Int F'(y,x,phi) psi'(y) dy].
Eigen::VectorXd control_from_costate(double x, const Eigen::VectorXd& phi_at_x,
                                     const GridFunction& psi,
                                     const NonlinearFredholmProblem& p);

/// Checks every supplied gradient against central finite differences of its
/// base callable at random (x, y, phi) samples. Throws ValidationError on
/// disagreement beyond rel_tol.
void validate_gradients(const NonlinearFredholmProblem& p, int samples = 100,
                        unsigned seed = 12345, double rel_tol = 1e-5);

/// Damped Picard iteration on the coupled state/costate system obtained by
/// substituting the pointwise optimal control into the dynamics and the
/// costate equation. Starts from phi = phi0, psi = 0.
CoupledSolution solve_coupled(const NonlinearFredholmProblem& p,
                              const PicardSettings& settings);

/// Direct quadrature of the running cost at (phi, u).
double nl_cost(const NonlinearFredholmProblem& p, const GridFunction& phi,
               const GridFunction& u);

} // namespace ocie
