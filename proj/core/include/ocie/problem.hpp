#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "ocie/expr.hpp"
#include "ocie/grid.hpp"
#include "ocie/kernel_field.hpp"

namespace ocie {

enum class ProblemKind { QuadForm, FredholmLQ, NonlinearFredholm, VolterraLQ };

const char* to_string(ProblemKind k);

/// Matrix of expression trees, row-major.
struct ExprMatrix {
    int rows = 0;
    int cols = 0;
    std::vector<ExprPtr> entries;

    const ExprPtr& at(int r, int c) const { return entries[r * cols + c]; }
};

struct SolverSettings {
    int grid_n = 65;
    QuadratureRule rule = QuadratureRule::Trapezoid;
    double tol = 1e-10;
    int max_iter = 200;
    double damping = 1.0;
};

/// Parsed and validated problem document.
struct ProblemSpec {
    ProblemKind kind = ProblemKind::QuadForm;
    double a = 0.0;
    double b = 1.0;
    int n = 1; // state components
    int m = 1; // control components
    std::map<std::string, ExprMatrix> kernels;
    SolverSettings settings;
};

/// Parses a JSON problem document (strict mode: unknown keys are an error),
/// validating kernel roles, shapes, and the identifiers used by every
/// expression. Throws ParseError / ValidationError.
ProblemSpec parse_problem(const std::string& text);

/// Entrywise evaluation of an expression matrix at grid nodes (arity One)
/// or node pairs (arity Two). var_names supplies the one or two variable
/// names bound to the node coordinates.
MatrixKernelField eval_kernel(const ExprMatrix& e, GridPtr grid, KernelArity arity,
                              std::span<const std::string> var_names);

} // namespace ocie
