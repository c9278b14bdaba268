#include "ocie/problem.hpp"

#include <json.hpp>

#include "ocie/errors.hpp"

namespace ocie {

using nlohmann::json;

const char* to_string(ProblemKind k) {
    switch (k) {
    case ProblemKind::QuadForm: return "quadform";
    case ProblemKind::FredholmLQ: return "fredholm_lq";
    case ProblemKind::NonlinearFredholm: return "nonlinear_fredholm";
    case ProblemKind::VolterraLQ: return "volterra_lq";
    }
    return "?";
}

namespace {

struct RoleSpec {
    int rows;
    int cols;
    KernelArity arity;
    bool state_vars; // expressions may also reference p1..pn
};

void line_col_of(const std::string& text, size_t byte, int& line, int& col) {
    line = 1;
    col = 1;
    for (size_t i = 0; i < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
}

void reject_unknown_keys(const json& obj, std::initializer_list<const char*> allowed,
                         const char* where) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool ok = false;
        for (const char* k : allowed)
            if (it.key() == k) ok = true;
        if (!ok)
            throw ValidationError(std::string("unknown key '") + it.key() + "' in " + where);
    }
}

ProblemKind parse_kind(const std::string& s) {
    if (s == "quadform") return ProblemKind::QuadForm;
    if (s == "fredholm_lq") return ProblemKind::FredholmLQ;
    if (s == "nonlinear_fredholm") return ProblemKind::NonlinearFredholm;
    if (s == "volterra_lq") return ProblemKind::VolterraLQ;
    throw ValidationError("unknown problem kind '" + s + "'");
}

// Required kernel roles and their shapes in terms of (n, m).
std::map<std::string, RoleSpec> roles_for(ProblemKind kind, int n, int m) {
    switch (kind) {
    case ProblemKind::QuadForm:
        return {{"K1", {n, n, KernelArity::One, false}},
                {"K2", {n, n, KernelArity::Two, false}},
                {"r0", {n, 1, KernelArity::One, false}}};
    case ProblemKind::FredholmLQ:
        return {{"A", {n, n, KernelArity::Two, false}},
                {"B", {n, m, KernelArity::Two, false}},
                {"phi0", {n, 1, KernelArity::One, false}},
                {"P", {n, n, KernelArity::One, false}},
                {"Q", {n, m, KernelArity::One, false}},
                {"R", {m, m, KernelArity::One, false}}};
    case ProblemKind::VolterraLQ:
        return {{"A", {n, n, KernelArity::Two, false}},
                {"B", {n, m, KernelArity::Two, false}},
                {"y0", {n, 1, KernelArity::One, false}},
                {"P", {n, n, KernelArity::One, false}},
                {"Q", {n, m, KernelArity::One, false}},
                {"R", {m, m, KernelArity::One, false}}};
    case ProblemKind::NonlinearFredholm:
        // Rank-3 state gradients are flattened row-major over the base
        // object's (row, col) index; the gradient (state) index is the
        // column of the expression matrix.
        return {{"phi0", {n, 1, KernelArity::One, false}},
                {"f", {n, 1, KernelArity::Two, true}},
                {"F", {n, m, KernelArity::Two, true}},
                {"g0", {1, 1, KernelArity::One, true}},
                {"g1", {m, 1, KernelArity::One, true}},
                {"G", {m, m, KernelArity::One, true}},
                {"grad_f", {n, n, KernelArity::Two, true}},
                {"grad_F", {n * m, n, KernelArity::Two, true}},
                {"grad_g0", {1, n, KernelArity::One, true}},
                {"grad_g1", {m, n, KernelArity::One, true}},
                {"grad_G", {m * m, n, KernelArity::One, true}}};
    }
    throw ValidationError("bad kind");
}

std::vector<std::string> allowed_vars(ProblemKind kind, KernelArity arity,
                                      bool state_vars, int n) {
    std::vector<std::string> vars;
    if (kind == ProblemKind::VolterraLQ) {
        vars.push_back("t");
        if (arity == KernelArity::Two) vars.push_back("s");
    } else {
        vars.push_back("x");
        if (arity == KernelArity::Two) vars.push_back("y");
    }
    if (state_vars)
        for (int j = 1; j <= n; ++j) vars.push_back("p" + std::to_string(j));
    return vars;
}

} // namespace

ProblemSpec parse_problem(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        int line = 1, col = 1;
        line_col_of(text, e.byte > 0 ? e.byte - 1 : 0, line, col);
        throw ParseError(std::string("JSON syntax error: ") + e.what(), line, col);
    }
    if (!doc.is_object())
        throw ValidationError("problem document must be a JSON object");

    reject_unknown_keys(doc, {"kind", "domain", "dims", "kernels", "settings"},
                        "problem document");
    for (const char* key : {"kind", "domain", "dims", "kernels"})
        if (!doc.contains(key))
            throw ValidationError(std::string("missing required key '") + key + "'");

    ProblemSpec spec;
    spec.kind = parse_kind(doc.at("kind").get<std::string>());

    const json& domain = doc.at("domain");
    reject_unknown_keys(domain, {"a", "b"}, "domain");
    spec.a = domain.at("a").get<double>();
    spec.b = domain.at("b").get<double>();
    if (!(spec.a < spec.b)) throw ValidationError("domain must satisfy a < b");

    const json& dims = doc.at("dims");
    reject_unknown_keys(dims, {"n", "m"}, "dims");
    spec.n = dims.at("n").get<int>();
    spec.m = dims.contains("m") ? dims.at("m").get<int>() : 1;
    if (spec.n < 1 || spec.m < 1) throw ValidationError("dims must be positive");

    if (doc.contains("settings")) {
        const json& s = doc.at("settings");
        reject_unknown_keys(s, {"grid_n", "rule", "tol", "max_iter", "damping"},
                            "settings");
        if (s.contains("grid_n")) spec.settings.grid_n = s.at("grid_n").get<int>();
        if (s.contains("rule")) {
            const std::string r = s.at("rule").get<std::string>();
            if (r == "trapezoid")
                spec.settings.rule = QuadratureRule::Trapezoid;
            else if (r == "gauss" || r == "gauss-legendre")
                spec.settings.rule = QuadratureRule::GaussLegendre;
            else
                throw ValidationError("unknown quadrature rule '" + r + "'");
        }
        if (s.contains("tol")) spec.settings.tol = s.at("tol").get<double>();
        if (s.contains("max_iter")) spec.settings.max_iter = s.at("max_iter").get<int>();
        if (s.contains("damping")) spec.settings.damping = s.at("damping").get<double>();
        if (spec.settings.grid_n < 2) throw ValidationError("settings.grid_n must be >= 2");
        if (spec.settings.tol <= 0) throw ValidationError("settings.tol must be positive");
        if (spec.settings.damping <= 0 || spec.settings.damping > 1)
            throw ValidationError("settings.damping must lie in (0, 1]");
    }

    const auto roles = roles_for(spec.kind, spec.n, spec.m);
    const json& kernels = doc.at("kernels");
    if (!kernels.is_object()) throw ValidationError("kernels must be an object");
    for (auto it = kernels.begin(); it != kernels.end(); ++it)
        if (!roles.contains(it.key()))
            throw ValidationError("unknown kernel role '" + it.key() + "' for kind " +
                                  to_string(spec.kind));

    for (const auto& [role, rs] : roles) {
        if (!kernels.contains(role))
            throw ValidationError("missing kernel role '" + role + "'");
        const json& mat = kernels.at(role);
        if (!mat.is_array() || mat.empty())
            throw ValidationError("kernel '" + role + "' must be a non-empty array of rows");
        ExprMatrix em;
        em.rows = static_cast<int>(mat.size());
        em.cols = -1;
        const auto vars = allowed_vars(spec.kind, rs.arity, rs.state_vars, spec.n);
        for (const json& row : mat) {
            if (!row.is_array() || row.empty())
                throw ValidationError("kernel '" + role + "' rows must be non-empty arrays");
            if (em.cols < 0)
                em.cols = static_cast<int>(row.size());
            else if (em.cols != static_cast<int>(row.size()))
                throw ValidationError("kernel '" + role + "' has ragged rows");
            for (const json& cell : row) {
                if (!cell.is_string())
                    throw ValidationError("kernel '" + role +
                                          "' entries must be expression strings");
                ExprPtr e;
                try {
                    e = parse_expression(cell.get<std::string>());
                } catch (const ParseError& pe) {
                    throw ParseError("in kernel '" + role + "': " + pe.what(), pe.line(),
                                     pe.column());
                }
                try {
                    validate_variables(*e, vars);
                } catch (const ValidationError& ve) {
                    throw ValidationError("in kernel '" + role + "': " + ve.what());
                }
                em.entries.push_back(std::move(e));
            }
        }
        if (em.rows != rs.rows || em.cols != rs.cols)
            throw ValidationError("kernel '" + role + "' must be " + std::to_string(rs.rows) +
                                  "x" + std::to_string(rs.cols) + ", got " +
                                  std::to_string(em.rows) + "x" + std::to_string(em.cols));
        spec.kernels.emplace(role, std::move(em));
    }
    return spec;
}

MatrixKernelField eval_kernel(const ExprMatrix& e, GridPtr grid, KernelArity arity,
                              std::span<const std::string> var_names) {
    const size_t need = arity == KernelArity::One ? 1 : 2;
    if (var_names.size() != need)
        throw ValidationError("eval_kernel: wrong number of variable names");

    MatrixKernelField out(grid, arity, e.rows, e.cols);
    EvalEnv env;
    const int nn = grid->size();
    auto eval_block = [&](auto&& block, int node_i, int node_j) {
        for (int r = 0; r < e.rows; ++r)
            for (int c = 0; c < e.cols; ++c) {
                try {
                    block(r, c) = eval(*e.at(r, c), env);
                } catch (const EvalError& ee) {
                    std::string where = arity == KernelArity::One
                                            ? "node " + std::to_string(node_i)
                                            : "node pair (" + std::to_string(node_i) + ", " +
                                                  std::to_string(node_j) + ")";
                    throw EvalError(std::string(ee.what()) + " at " + where);
                }
            }
    };
    if (arity == KernelArity::One) {
        for (int i = 0; i < nn; ++i) {
            env.set(std::string(var_names[0]), grid->node(i));
            eval_block(out.block(i), i, -1);
        }
    } else {
        for (int i = 0; i < nn; ++i) {
            env.set(std::string(var_names[0]), grid->node(i));
            for (int j = 0; j < nn; ++j) {
                env.set(std::string(var_names[1]), grid->node(j));
                eval_block(out.block(i, j), i, j);
            }
        }
    }
    return out;
}

} // namespace ocie
