#pragma once

#include "ocie/fredholm.hpp"
#include "ocie/grid_function.hpp"
#include "ocie/kernel_field.hpp"

namespace ocie {

/// Linear Volterra dynamics y(t) = y0(t) + Int_0^t {A y + B u} ds with
/// quadratic cost over [0, T]. Requires a trapezoid grid (the causal
/// triangle rule needs the endpoints among the nodes).
struct VolterraLQProblem {
    MatrixKernelField A;  // n x n, two-arg over (t, s)
    MatrixKernelField B;  // n x m, two-arg
    GridFunction y0;      // n
    MatrixKernelField P;  // n x n, one-arg
    MatrixKernelField Q;  // n x m, one-arg
    MatrixKernelField R;  // m x m, one-arg, invertible nodewise
};

/// Kernels of the eliminated system:
///   K1(t,sigma) = Int_0^{min(t,sigma)} B(sigma,s) R^{-1}(s) B'(t,s) ds
///   C(t,s)      = A'(t,s) - Q(s) R^{-1}(s) B'(t,s).
/// K1 is assembled with the product quadrature weights that make the
/// discrete state/costate system the exact first-order conditions of the
/// trapezoid-discretized control problem; its diagonal therefore differs
/// from the naive min-integral rule by O(h).
struct VolterraDerived {
    MatrixKernelField K1;
    MatrixKernelField C;
    bool printed_k1_variant = false; // integrand B(sigma,t) instead of B(sigma,s)
};

struct VolterraSolution {
    GridFunction u_star;
    GridFunction y_star;
    GridFunction psi_star;   // rows are covectors
    double cost = 0.0;
    double path_agreement = 0.0;       // joint vs resolvent-path control gap
    double stationarity_residual = 0.0; // Hamiltonian stationarity defect
    double costate_residual = 0.0;      // defect of the raw costate equation
};

VolterraDerived derived_kernels(const VolterraLQProblem& p, bool printed_k1 = false);

/// Primary path: one dense linear system coupling state and costate over
/// the whole horizon, followed by algebraic recovery of the control.
VolterraSolution solve_joint(const VolterraLQProblem& p, const VolterraDerived& d);

/// Cross-check path: discrete Volterra resolvent of C, composite kernel S1,
/// a second-kind Fredholm solve for the costate alone, then state and
/// control recovery through the resolvent representation.
VolterraSolution solve_resolvent_path(const VolterraLQProblem& p,
                                      const VolterraDerived& d);

/// Runs both paths and records their max-norm control gap in path_agreement.
VolterraSolution solve(const VolterraLQProblem& p);

/// Direct quadrature of the cost at (y, u).
double volterra_cost(const VolterraLQProblem& p, const GridFunction& y,
                     const GridFunction& u);

} // namespace ocie
