#pragma once

#include "ocie/fredholm.hpp"
#include "ocie/quadform.hpp"

namespace ocie {

/// Linear Fredholm dynamics phi = phi0 + Int {A phi + B u} with quadratic
/// cost Int { 1/2 phi'P phi + phi'Q u + 1/2 u'R u }.
struct FredholmLQProblem {
    MatrixKernelField A;  // n x n, two-arg
    MatrixKernelField B;  // n x m, two-arg
    GridFunction phi0;    // n
    MatrixKernelField P;  // n x n, one-arg (symmetrized on load)
    MatrixKernelField Q;  // n x m, one-arg
    MatrixKernelField R;  // m x m, one-arg (symmetrized on load)
};

struct ReducedState {
    GridFunction phi1;      // phi0 + Int K phi0, K the resolvent of A
    MatrixKernelField B1;   // B + Int K B
    double resolvent_residual = 0.0;
};

struct ReducedForm {
    QuadFormProblem form;  // (K1, K2, r) acting on controls
    double constant_term;  // 1/2 Int phi1' P phi1, reported with the cost
};

struct LQSolution {
    GridFunction u_star;
    GridFunction state;
    double cost = 0.0;
    double stationarity_residual = 0.0; // defect of the stationarity equation at u*
    PdCertificate certificate;
    bool stationary_only = false;
};

/// Resolvent reduction of the dynamics to phi = phi1 + Int B1 u.
ReducedState reduce_state(const FredholmLQProblem& p);

/// Substitutes the reduced state into the cost, yielding a quadratic form
/// over controls with K1 = R,
///   K2(x1,x2) = Int B1'(y,x1) P(y) B1(y,x2) dy + B1'(x2,x1) Q(x2) + Q'(x1) B1(x1,x2),
///   r'(x)     = Int phi1'(y) P(y) B1(y,x) dy + phi1'(x) Q(x).
ReducedForm assemble_reduced_form(const FredholmLQProblem& p, const ReducedState& rs);

/// Solves the stationarity integral equation for u* directly, assembling
/// each of its terms from (phi1, B1) without going through the reduced form.
GridFunction solve_stationarity(const FredholmLQProblem& p, const ReducedState& rs);

/// Full pipeline: reduce, assemble, certify, minimize, reconstruct the
/// state, and record the stationarity residual of u* as a cross-check.
LQSolution solve(const FredholmLQProblem& p);

/// Direct quadrature of the cost at a given control, with the state taken
/// from the reduced representation.
double direct_cost(const FredholmLQProblem& p, const ReducedState& rs,
                   const GridFunction& u);

} // namespace ocie
