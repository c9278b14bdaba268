#pragma once

#include "ocie/lq_fredholm.hpp"
#include "ocie/lq_volterra.hpp"
#include "ocie/nl_fredholm.hpp"
#include "ocie/problem.hpp"
#include "ocie/quadform.hpp"

namespace ocie {

// Sampling of a parsed ProblemSpec onto a concrete grid. Each builder
// checks that the problem's kind matches.

QuadFormProblem make_quadform(const ProblemSpec& spec, GridPtr grid);
FredholmLQProblem make_fredholm_lq(const ProblemSpec& spec, GridPtr grid);
VolterraLQProblem make_volterra_lq(const ProblemSpec& spec, GridPtr grid);

/// Wraps the nonlinear kernel expressions (state components bound to
/// variables p1..pn) into the callable families the solver consumes.
NonlinearFredholmProblem make_nonlinear_fredholm(const ProblemSpec& spec, GridPtr grid);

} // namespace ocie
