#include "ocie/instantiate.hpp"

#include "ocie/errors.hpp"

namespace ocie {

namespace {

void require_kind(const ProblemSpec& spec, ProblemKind kind) {
    if (spec.kind != kind)
        throw ValidationError(std::string("problem kind mismatch: expected ") +
                              to_string(kind) + ", got " + to_string(spec.kind));
}

const ExprMatrix& role(const ProblemSpec& spec, const char* name) {
    auto it = spec.kernels.find(name);
    if (it == spec.kernels.end())
        throw ValidationError(std::string("missing kernel role '") + name + "'");
    return it->second;
}

const std::vector<std::string> kXY = {"x", "y"};
const std::vector<std::string> kX = {"x"};
const std::vector<std::string> kTS = {"t", "s"};
const std::vector<std::string> kT = {"t"};

GridFunction eval_vector(const ExprMatrix& e, GridPtr grid, const std::string& var) {
    MatrixKernelField f = eval_kernel(e, grid, KernelArity::One,
                                      std::span<const std::string>(&var, 1));
    Eigen::MatrixXd values(grid->size(), e.rows);
    for (int i = 0; i < grid->size(); ++i)
        values.row(i) = Eigen::VectorXd(f.block(i)).transpose();
    return GridFunction(grid, std::move(values));
}

// Evaluates a matrix of expressions at a point with the state components
// bound to p1..pn.
Eigen::MatrixXd eval_matrix_at(const ExprMatrix& e, EvalEnv& env) {
    Eigen::MatrixXd out(e.rows, e.cols);
    for (int r = 0; r < e.rows; ++r)
        for (int c = 0; c < e.cols; ++c) out(r, c) = eval(*e.at(r, c), env);
    return out;
}

void bind_state(EvalEnv& env, const Eigen::VectorXd& phi) {
    for (int j = 0; j < phi.size(); ++j)
        env.set("p" + std::to_string(j + 1), phi[j]);
}

} // namespace

QuadFormProblem make_quadform(const ProblemSpec& spec, GridPtr grid) {
    require_kind(spec, ProblemKind::QuadForm);
    return QuadFormProblem{
        eval_kernel(role(spec, "K1"), grid, KernelArity::One, kX),
        eval_kernel(role(spec, "K2"), grid, KernelArity::Two, kXY),
        eval_vector(role(spec, "r0"), grid, "x"),
    };
}

FredholmLQProblem make_fredholm_lq(const ProblemSpec& spec, GridPtr grid) {
    require_kind(spec, ProblemKind::FredholmLQ);
    return FredholmLQProblem{
        eval_kernel(role(spec, "A"), grid, KernelArity::Two, kXY),
        eval_kernel(role(spec, "B"), grid, KernelArity::Two, kXY),
        eval_vector(role(spec, "phi0"), grid, "x"),
        eval_kernel(role(spec, "P"), grid, KernelArity::One, kX),
        eval_kernel(role(spec, "Q"), grid, KernelArity::One, kX),
        eval_kernel(role(spec, "R"), grid, KernelArity::One, kX),
    };
}

VolterraLQProblem make_volterra_lq(const ProblemSpec& spec, GridPtr grid) {
    require_kind(spec, ProblemKind::VolterraLQ);
    return VolterraLQProblem{
        eval_kernel(role(spec, "A"), grid, KernelArity::Two, kTS),
        eval_kernel(role(spec, "B"), grid, KernelArity::Two, kTS),
        eval_vector(role(spec, "y0"), grid, "t"),
        eval_kernel(role(spec, "P"), grid, KernelArity::One, kT),
        eval_kernel(role(spec, "Q"), grid, KernelArity::One, kT),
        eval_kernel(role(spec, "R"), grid, KernelArity::One, kT),
    };
}

NonlinearFredholmProblem make_nonlinear_fredholm(const ProblemSpec& spec, GridPtr grid) {
    require_kind(spec, ProblemKind::NonlinearFredholm);
    const int n = spec.n;
    const int m = spec.m;

    NonlinearFredholmProblem p{n, m, eval_vector(role(spec, "phi0"), grid, "x"),
                               {}, {}, {}, {}, {}, {}, {}, {}, {}, {}};

    auto two_arg = [](ExprMatrix e) {
        return [e = std::move(e)](double x, double y, const Eigen::VectorXd& phi) {
            EvalEnv env;
            env.set("x", x);
            env.set("y", y);
            bind_state(env, phi);
            return eval_matrix_at(e, env);
        };
    };
    auto one_arg = [](ExprMatrix e) {
        return [e = std::move(e)](double x, const Eigen::VectorXd& phi) {
            EvalEnv env;
            env.set("x", x);
            bind_state(env, phi);
            return eval_matrix_at(e, env);
        };
    };

    auto f2 = two_arg(role(spec, "f"));
    p.f = [f2, n](double x, double y, const Eigen::VectorXd& phi) {
        return Eigen::VectorXd(f2(x, y, phi).reshaped(n, 1));
    };
    p.F = two_arg(role(spec, "F"));
    auto g0m = one_arg(role(spec, "g0"));
    p.g0 = [g0m](double x, const Eigen::VectorXd& phi) { return g0m(x, phi)(0, 0); };
    auto g1m = one_arg(role(spec, "g1"));
    p.g1 = [g1m, m](double x, const Eigen::VectorXd& phi) {
        return Eigen::VectorXd(g1m(x, phi).reshaped(m, 1));
    };
    p.G = one_arg(role(spec, "G"));
    p.grad_f = two_arg(role(spec, "grad_f"));
    auto gF = two_arg(role(spec, "grad_F"));
    p.grad_F = [gF, n, m](double x, double y, const Eigen::VectorXd& phi) {
        // (n*m) x n, base index row-major over (row, col) of F, gradient
        // index in the columns
        const Eigen::MatrixXd flat = gF(x, y, phi);
        std::vector<Eigen::MatrixXd> out(n, Eigen::MatrixXd(n, m));
        for (int j = 0; j < n; ++j)
            for (int r = 0; r < n; ++r)
                for (int c = 0; c < m; ++c) out[j](r, c) = flat(r * m + c, j);
        return out;
    };
    auto gg0 = one_arg(role(spec, "grad_g0"));
    p.grad_g0 = [gg0](double x, const Eigen::VectorXd& phi) {
        return Eigen::RowVectorXd(gg0(x, phi).row(0));
    };
    p.grad_g1 = one_arg(role(spec, "grad_g1"));
    auto gG = one_arg(role(spec, "grad_G"));
    p.grad_G = [gG, n, m](double x, const Eigen::VectorXd& phi) {
        const Eigen::MatrixXd flat = gG(x, phi);
        std::vector<Eigen::MatrixXd> out(n, Eigen::MatrixXd(m, m));
        for (int j = 0; j < n; ++j)
            for (int r = 0; r < m; ++r)
                for (int c = 0; c < m; ++c) out[j](r, c) = flat(r * m + c, j);
        return out;
    };
    return p;
}

} // namespace ocie
