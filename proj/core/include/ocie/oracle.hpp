#pragma once

#include <Eigen/Dense>
#include <functional>

#include "ocie/grid.hpp"
#include "ocie/problem.hpp"

namespace ocie::oracle {

// Independent brute-force verifier. Discretizes each control problem
// directly into a finite-dimensional quadratic minimization over the
// stacked control vector, eliminating the state with a dense linear solve
// of the discretized dynamics. Deliberately shares no code with the
// fredholm / quadform / lq_* / nl_fredholm solvers: everything here is
// rebuilt from raw samplers with plain Eigen calls.

using Kernel1 = std::function<Eigen::MatrixXd(double)>;
using Kernel2 = std::function<Eigen::MatrixXd(double, double)>;
using VecFn = std::function<Eigen::VectorXd(double)>;

struct DiscreteQP {
    Eigen::MatrixXd H; // (N*m) x (N*m), symmetric
    Eigen::VectorXd r; // N*m
    double c0 = 0.0;
    int n_nodes = 0;
    int m = 0; // control components; stacked index = node * m + component
};

DiscreteQP assemble_qp_quadform(const Grid& grid, int n, const Kernel1& K1,
                                const Kernel2& K2, const VecFn& r0);

DiscreteQP assemble_qp_fredholm(const Grid& grid, int n, int m, const Kernel2& A,
                                const Kernel2& B, const VecFn& phi0,
                                const Kernel1& P, const Kernel1& Q, const Kernel1& R);

DiscreteQP assemble_qp_volterra(const Grid& grid, int n, int m, const Kernel2& A,
                                const Kernel2& B, const VecFn& y0, const Kernel1& P,
                                const Kernel1& Q, const Kernel1& R);

/// Dispatches on spec.kind for the three quadratic kinds.
DiscreteQP assemble_qp(const ProblemSpec& spec, const Grid& grid);

struct QpResult {
    Eigen::VectorXd u;
    double value = 0.0;
    bool hessian_pd = false;
};

/// Dense symmetric solve of H u = -r plus an eigenvalue check of H.
QpResult qp_minimize(const DiscreteQP& qp);

/// Central finite differences of an arbitrary stacked-control cost.
Eigen::VectorXd fd_gradient(const std::function<double(const Eigen::VectorXd&)>& cost,
                            const Eigen::VectorXd& u, double step);

/// Direct cost evaluation with the state re-solved from the discretized
/// dynamics (dense solve per call).
double direct_cost_fredholm(const Grid& grid, int n, int m, const Kernel2& A,
                            const Kernel2& B, const VecFn& phi0, const Kernel1& P,
                            const Kernel1& Q, const Kernel1& R,
                            const Eigen::VectorXd& u_stacked);

double direct_cost_volterra(const Grid& grid, int n, int m, const Kernel2& A,
                            const Kernel2& B, const VecFn& y0, const Kernel1& P,
                            const Kernel1& Q, const Kernel1& R,
                            const Eigen::VectorXd& u_stacked);

/// Nonlinear direct cost: Picard-solves the state-nonlinear dynamics for
/// the given control and integrates the running cost.
struct NonlinearSamplers {
    int n = 1;
    int m = 1;
    VecFn phi0;
    std::function<Eigen::VectorXd(double, double, const Eigen::VectorXd&)> f;
    std::function<Eigen::MatrixXd(double, double, const Eigen::VectorXd&)> F;
    std::function<double(double, const Eigen::VectorXd&)> g0;
    std::function<Eigen::VectorXd(double, const Eigen::VectorXd&)> g1;
    std::function<Eigen::MatrixXd(double, const Eigen::VectorXd&)> G;
};

double direct_cost_nonlinear(const Grid& grid, const NonlinearSamplers& s,
                             const Eigen::VectorXd& u_stacked);

/// Coarse descent with backtracking, used only to confirm a candidate is a
/// stationary point and a local minimum along random directions. Returns the
/// final gradient max-norm.
double descent_probe(const std::function<double(const Eigen::VectorXd&)>& cost,
                     Eigen::VectorXd u, int iterations = 50, double fd_step = 1e-5);

} // namespace ocie::oracle
