#pragma once

#include "ocie/grid_function.hpp"
#include "ocie/kernel_field.hpp"

namespace ocie {

/// Quadratic functional
///   E(w) = 1/2 II w'(x) K2(x,y) w(y) + I { 1/2 w'(x) K1(x) w(x) + r0'(x) w(x) }
/// over vector-valued w on the grid interval.
struct QuadFormProblem {
    MatrixKernelField K1; // one-arg, n x n
    MatrixKernelField K2; // two-arg, n x n
    GridFunction r0;      // n components
};

enum class PdVerdict { PositiveDefinite, PositiveSemiDefinite, Indefinite };

const char* to_string(PdVerdict v);

struct PdCertificate {
    double min_eigenvalue = 0.0; // smallest eigenvalue of the weighted
                                 // K1^{-1/2} K2 K1^{-1/2} matrix
    PdVerdict verdict = PdVerdict::Indefinite;
    bool k1_spd = false;         // every K1(x_i) symmetric positive definite
    int grid_n = 0;              // certification is at this fixed grid only
};

/// Margin separating PositiveDefinite / PositiveSemiDefinite / Indefinite
/// around the critical eigenvalue -1.
inline constexpr double kPdMargin = 1e-9;

/// Symmetrizations K1 <- (K1 + K1')/2, K2(x,y) <- (K2(x,y) + K2(y,x)')/2.
/// Leaves E unchanged.
QuadFormProblem symmetrize(const QuadFormProblem& p);

double eval_E(const QuadFormProblem& p, const GridFunction& w);

/// Purely quadratic part E_q(w).
double eval_Eq(const QuadFormProblem& p, const GridFunction& w);

/// Two-argument extension E~(w, v) built from the block kernel
/// [[K1(x)/|G|, K2(x,y)], [K2(y,x), K1(y)/|G|]]; satisfies E~(w,w) = E(w).
double eval_E_extended(const QuadFormProblem& p, const GridFunction& w,
                       const GridFunction& v);

/// Coercivity check: smallest eigenvalue of the symmetric matrix with blocks
/// sqrt(w_i) K1^{-1/2}(x_i) K2(x_i,x_j) K1^{-1/2}(x_j) sqrt(w_j).
/// PositiveDefinite requires every K1(x_i) SPD and lambda_min > -1 + margin.
/// Requires a symmetrized problem.
PdCertificate certify_pd(const QuadFormProblem& p);

struct QuadFormSolution {
    GridFunction w_star;
    double e_min = 0.0;
    PdCertificate certificate;
    bool stationary_only = false;      // certificate was not PositiveDefinite
    double min_value_identity_gap = 0; // |E(w*) - 1/2 <r0, w*>|
    double eq_identity_gap = 0;        // |E(w*) + E_q(w*)|
};

/// Solves K1 w + Int K2 w + r0 = 0 in second-kind form and evaluates the
/// minimum, together with the minimum-value identities
/// E(w*) = 1/2 <r0, w*> = -E_q(w*).
QuadFormSolution minimize(const QuadFormProblem& p);

} // namespace ocie
