#pragma once

#include "ocie/grid_function.hpp"
#include "ocie/kernel_field.hpp"

namespace ocie {

/// Reciprocal-condition threshold below which a Nystrom matrix is declared
/// singular (failure of the Fredholm alternative at this discretization).
inline constexpr double kSingularRcond = 1e-12;

struct ResolventKernel {
    MatrixKernelField base;      // the kernel A
    MatrixKernelField resolvent; // the kernel K with K = A + A o K
    double residual_norm;        // max-norm discrete defect of the identity
};

/// Solves w(x) = g(x) + sign * Int_G K(x,y) w(y) dy by the dense Nystrom
/// linear system. sign must be +1 or -1.
GridFunction solve_second_kind(const MatrixKernelField& K, const GridFunction& g,
                               int sign);

/// Resolvent kernel of A: K(x,y) = A(x,y) + Int_G A(x,z) K(z,y) dz,
/// one Nystrom solve shared by all column blocks.
ResolventKernel resolvent(const MatrixKernelField& A);

enum class VolterraDirection { Forward, Backward };

/// Forward:  w(t) = g(t) + Int_0^t C(t,s) w(s) ds
/// Backward: w(t) = g(t) + Int_t^T w(s) C(s,t) ds   (row-vector convention;
/// w rows are covectors multiplying C from the left).
/// Both use per-row trapezoid weights on the moving subinterval.
GridFunction solve_volterra_second_kind(const MatrixKernelField& C,
                                        const GridFunction& g,
                                        VolterraDirection direction);

} // namespace ocie
