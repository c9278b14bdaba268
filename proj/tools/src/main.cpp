#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ocie/errors.hpp"
#include "ocie/instantiate.hpp"
#include "ocie/lq_fredholm.hpp"
#include "ocie/lq_volterra.hpp"
#include "ocie/nl_fredholm.hpp"
#include "ocie/oracle.hpp"
#include "ocie/problem.hpp"
#include "ocie/quadform.hpp"

using nlohmann::ordered_json;

namespace {

struct Options {
    std::string problem_path;
    std::string out_dir = ".";
    std::string out = "json";
    std::string rule;
    int n = -1;
    double tol = -1.0;
    int max_iter = -1;
    double damping = -1.0;
    bool compare_paths = false;
    bool use_printed_k1 = false;
    bool no_timings = false;
    std::vector<int> ladder;
};

class StageTimer {
public:
    void start(const std::string& name) {
        name_ = name;
        t0_ = std::chrono::steady_clock::now();
    }
    void stop() {
        const auto dt = std::chrono::steady_clock::now() - t0_;
        stages_.emplace_back(name_,
                             std::chrono::duration<double, std::milli>(dt).count());
    }
    ordered_json to_json() const {
        ordered_json j = ordered_json::object();
        for (const auto& [name, ms] : stages_) j[name] = ms;
        return j;
    }

private:
    std::string name_;
    std::chrono::steady_clock::time_point t0_;
    std::vector<std::pair<std::string, double>> stages_;
};

ocie::ProblemSpec load_problem(const Options& opt) {
    std::ifstream in(opt.problem_path);
    if (!in)
        throw ocie::ParseError("cannot open problem file '" + opt.problem_path + "'", 1, 1);
    std::ostringstream buf;
    buf << in.rdbuf();
    ocie::ProblemSpec spec = ocie::parse_problem(buf.str());

    if (opt.n > 0) spec.settings.grid_n = opt.n;
    if (!opt.rule.empty()) {
        if (opt.rule == "trapezoid")
            spec.settings.rule = ocie::QuadratureRule::Trapezoid;
        else if (opt.rule == "gauss")
            spec.settings.rule = ocie::QuadratureRule::GaussLegendre;
        else
            throw ocie::ValidationError("unknown quadrature rule '" + opt.rule + "'");
    }
    if (opt.tol > 0) spec.settings.tol = opt.tol;
    if (opt.max_iter > 0) spec.settings.max_iter = opt.max_iter;
    if (opt.damping > 0) spec.settings.damping = opt.damping;
    return spec;
}

ocie::GridPtr grid_of(const ocie::ProblemSpec& spec) {
    return ocie::make_grid(spec.a, spec.b, spec.settings.grid_n, spec.settings.rule);
}

const char* rule_name(ocie::QuadratureRule r) {
    return r == ocie::QuadratureRule::Trapezoid ? "trapezoid" : "gauss";
}

ordered_json matrix_json(const Eigen::MatrixXd& m) {
    ordered_json rows = ordered_json::array();
    for (int i = 0; i < m.rows(); ++i) {
        ordered_json row = ordered_json::array();
        for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

ordered_json certificate_json(const ocie::PdCertificate& c) {
    return ordered_json{{"min_eigenvalue", c.min_eigenvalue},
                        {"verdict", ocie::to_string(c.verdict)},
                        {"k1_spd", c.k1_spd},
                        {"grid_n", c.grid_n}};
}

ordered_json base_report(const ocie::ProblemSpec& spec) {
    return ordered_json{{"schema_version", 1},
                        {"kind", ocie::to_string(spec.kind)},
                        {"grid",
                         {{"a", spec.a},
                          {"b", spec.b},
                          {"n", spec.settings.grid_n},
                          {"rule", rule_name(spec.settings.rule)}}}};
}

Eigen::VectorXd stack_rows(const Eigen::MatrixXd& m) {
    Eigen::VectorXd v(m.rows() * m.cols());
    for (int i = 0; i < m.rows(); ++i)
        v.segment(i * m.cols(), m.cols()) = m.row(i).transpose();
    return v;
}

void write_csv(const std::string& path, const char* coord, const ocie::Grid& grid,
               const Eigen::MatrixXd& u, const Eigen::MatrixXd* state,
               const Eigen::MatrixXd* costate) {
    std::ofstream out(path);
    out << "node," << coord;
    for (int c = 0; c < u.cols(); ++c) out << ",u_" << c + 1;
    if (state)
        for (int c = 0; c < state->cols(); ++c) out << ",state_" << c + 1;
    if (costate)
        for (int c = 0; c < costate->cols(); ++c) out << ",costate_" << c + 1;
    out << "\n";
    char buf[32];
    auto put = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        out << ',' << buf;
    };
    for (int i = 0; i < grid.size(); ++i) {
        out << i;
        put(grid.node(i));
        for (int c = 0; c < u.cols(); ++c) put(u(i, c));
        if (state)
            for (int c = 0; c < state->cols(); ++c) put((*state)(i, c));
        if (costate)
            for (int c = 0; c < costate->cols(); ++c) put((*costate)(i, c));
        out << "\n";
    }
}

struct SolveResult {
    Eigen::MatrixXd u;
    Eigen::MatrixXd state;   // empty when the kind has none
    Eigen::MatrixXd costate; // empty when the kind has none
    double cost = 0.0;
    ordered_json extras = ordered_json::object();
};

SolveResult run_solver(const ocie::ProblemSpec& spec, ocie::GridPtr grid,
                       const Options& opt, StageTimer& timer) {
    SolveResult res;
    switch (spec.kind) {
    case ocie::ProblemKind::QuadForm: {
        timer.start("minimize_ms");
        const ocie::QuadFormSolution sol = ocie::minimize(ocie::make_quadform(spec, grid));
        timer.stop();
        res.u = sol.w_star.values();
        res.cost = sol.e_min;
        res.extras["residuals"] = {{"min_value_identity_gap", sol.min_value_identity_gap},
                                   {"eq_identity_gap", sol.eq_identity_gap}};
        res.extras["certificate"] = certificate_json(sol.certificate);
        res.extras["stationary_only"] = sol.stationary_only;
        break;
    }
    case ocie::ProblemKind::FredholmLQ: {
        timer.start("solve_ms");
        const ocie::LQSolution sol = ocie::solve(ocie::make_fredholm_lq(spec, grid));
        timer.stop();
        res.u = sol.u_star.values();
        res.state = sol.state.values();
        res.cost = sol.cost;
        res.extras["residuals"] = {{"stationarity", sol.stationarity_residual}};
        res.extras["certificate"] = certificate_json(sol.certificate);
        res.extras["stationary_only"] = sol.stationary_only;
        break;
    }
    case ocie::ProblemKind::NonlinearFredholm: {
        const ocie::NonlinearFredholmProblem p = ocie::make_nonlinear_fredholm(spec, grid);
        timer.start("validate_gradients_ms");
        ocie::validate_gradients(p);
        timer.stop();
        timer.start("solve_ms");
        const ocie::CoupledSolution sol = ocie::solve_coupled(
            p, ocie::PicardSettings{spec.settings.tol, spec.settings.max_iter,
                                    spec.settings.damping});
        timer.stop();
        res.u = sol.u_star.values();
        res.state = sol.iterate.phi.values();
        res.costate = sol.iterate.psi.values();
        res.cost = sol.cost;
        res.extras["residuals"] = {{"state", sol.iterate.residual_phi},
                                   {"costate", sol.iterate.residual_psi},
                                   {"stationarity", sol.stationarity_residual}};
        res.extras["iterations"] = sol.iterate.iteration;
        break;
    }
    case ocie::ProblemKind::VolterraLQ: {
        const ocie::VolterraLQProblem p = ocie::make_volterra_lq(spec, grid);
        timer.start("derived_kernels_ms");
        const ocie::VolterraDerived d = ocie::derived_kernels(p);
        timer.stop();
        timer.start("solve_ms");
        ocie::VolterraSolution sol =
            opt.compare_paths ? ocie::solve(p) : ocie::solve_joint(p, d);
        timer.stop();
        res.u = sol.u_star.values();
        res.state = sol.y_star.values();
        res.costate = sol.psi_star.values();
        res.cost = sol.cost;
        res.extras["residuals"] = {{"stationarity", sol.stationarity_residual},
                                   {"costate", sol.costate_residual}};
        if (opt.compare_paths) res.extras["path_agreement"] = sol.path_agreement;

        if (opt.use_printed_k1) {
            timer.start("printed_k1_ms");
            const ocie::VolterraDerived dp = ocie::derived_kernels(p, true);
            const ocie::VolterraSolution sp = ocie::solve_joint(p, dp);
            const ocie::oracle::DiscreteQP qp = ocie::oracle::assemble_qp(spec, *grid);
            const ocie::oracle::QpResult orc = ocie::oracle::qp_minimize(qp);
            const double derived_gap =
                (stack_rows(sol.u_star.values()) - orc.u).cwiseAbs().maxCoeff();
            const double printed_gap =
                (stack_rows(sp.u_star.values()) - orc.u).cwiseAbs().maxCoeff();
            timer.stop();
            res.extras["printed_k1_report"] = {{"derived_oracle_gap", derived_gap},
                                               {"printed_oracle_gap", printed_gap},
                                               {"printed_cost", sp.cost}};
        }
        break;
    }
    }
    return res;
}

int cmd_solve(const Options& opt) {
    StageTimer timer;
    timer.start("parse_ms");
    const ocie::ProblemSpec spec = load_problem(opt);
    timer.stop();
    const ocie::GridPtr grid = grid_of(spec);

    const SolveResult res = run_solver(spec, grid, opt, timer);

    ordered_json doc = base_report(spec);
    doc["cost"] = res.cost;
    doc["u_star"] = matrix_json(res.u);
    doc["state"] = res.state.size() ? matrix_json(res.state) : ordered_json(nullptr);
    doc["costate"] = res.costate.size() ? matrix_json(res.costate) : ordered_json(nullptr);
    for (const auto& [k, v] : res.extras.items()) doc[k] = v;
    if (!opt.no_timings) doc["timings"] = timer.to_json();

    if (opt.out == "json" || opt.out == "both") {
        std::ofstream out(opt.out_dir + "/solution.json");
        out << doc.dump(2) << "\n";
    }
    if (opt.out == "csv" || opt.out == "both") {
        const char* coord = spec.kind == ocie::ProblemKind::VolterraLQ ? "t" : "x";
        write_csv(opt.out_dir + "/solution.csv", coord, *grid, res.u,
                  res.state.size() ? &res.state : nullptr,
                  res.costate.size() ? &res.costate : nullptr);
    }
    std::cout << "kind=" << ocie::to_string(spec.kind) << " n=" << spec.settings.grid_n
              << " cost=" << res.cost << "\n";
    if (res.extras.contains("printed_k1_report"))
        std::cout << "printed_k1_report: " << res.extras["printed_k1_report"].dump()
                  << "\n";
    return 0;
}

// The quadratic form whose PD certificate is requested: the problem itself
// for quadform, the reduced control form for Fredholm LQ.
ocie::QuadFormProblem pd_form(const ocie::ProblemSpec& spec, ocie::GridPtr grid) {
    if (spec.kind == ocie::ProblemKind::QuadForm)
        return ocie::symmetrize(ocie::make_quadform(spec, grid));
    if (spec.kind == ocie::ProblemKind::FredholmLQ) {
        const ocie::FredholmLQProblem p = ocie::make_fredholm_lq(spec, grid);
        return ocie::symmetrize(
            ocie::assemble_reduced_form(p, ocie::reduce_state(p)).form);
    }
    throw ocie::ValidationError("check-pd expects a quadform or fredholm_lq problem");
}

int cmd_check_pd(const Options& opt) {
    ocie::ProblemSpec spec = load_problem(opt);
    ordered_json doc = base_report(spec);
    ordered_json certs = ordered_json::array();
    const int n0 = spec.settings.grid_n;
    for (int n : {n0, 2 * n0 - 1}) {
        spec.settings.grid_n = n;
        certs.push_back(certificate_json(ocie::certify_pd(pd_form(spec, grid_of(spec)))));
    }
    doc["certificates"] = certs;
    doc["verdict_stable"] =
        certs[0]["verdict"] == certs[1]["verdict"];
    std::cout << doc.dump(2) << "\n";
    return 0;
}

int cmd_oracle_compare(const Options& opt) {
    StageTimer timer;
    const ocie::ProblemSpec spec = load_problem(opt);
    const ocie::GridPtr grid = grid_of(spec);
    Options solver_opt = opt;
    solver_opt.use_printed_k1 = false;
    const SolveResult mod = run_solver(spec, grid, solver_opt, timer);
    const Eigen::VectorXd u_mod = stack_rows(mod.u);

    ordered_json doc = base_report(spec);
    doc["module_cost"] = mod.cost;

    if (spec.kind == ocie::ProblemKind::NonlinearFredholm) {
        const ocie::NonlinearFredholmProblem p = ocie::make_nonlinear_fredholm(spec, grid);
        ocie::oracle::NonlinearSamplers s;
        s.n = p.n;
        s.m = p.m;
        s.f = p.f;
        s.F = p.F;
        s.g0 = p.g0;
        s.g1 = p.g1;
        s.G = p.G;
        const ocie::GridFunction phi0 = p.phi0;
        // phi0 arrives sampled on this grid; the oracle only asks at nodes.
        s.phi0 = [phi0, grid](double x) {
            for (int i = 0; i < grid->size(); ++i)
                if (grid->node(i) == x) return phi0.at(i);
            throw ocie::ValidationError("phi0 sampler queried off-grid");
        };
        auto cost = [&](const Eigen::VectorXd& u) {
            return ocie::oracle::direct_cost_nonlinear(*grid, s, u);
        };
        const Eigen::VectorXd g = ocie::oracle::fd_gradient(cost, u_mod, 1e-6);
        doc["oracle_cost"] = cost(u_mod);
        doc["cost_gap"] = std::abs(mod.cost - cost(u_mod));
        doc["fd_gradient_norm"] = g.cwiseAbs().maxCoeff();
        doc["descent_probe_gradient_norm"] =
            ocie::oracle::descent_probe(cost, u_mod, 25);
    } else {
        const ocie::oracle::DiscreteQP qp = ocie::oracle::assemble_qp(spec, *grid);
        const ocie::oracle::QpResult orc = ocie::oracle::qp_minimize(qp);
        auto cost = [&](const Eigen::VectorXd& u) {
            return 0.5 * u.dot(qp.H * u) + qp.r.dot(u) + qp.c0;
        };
        const Eigen::VectorXd g = ocie::oracle::fd_gradient(cost, u_mod, 1e-6);
        doc["oracle_cost"] = orc.value;
        doc["oracle_hessian_pd"] = orc.hessian_pd;
        doc["control_gap"] = (u_mod - orc.u).cwiseAbs().maxCoeff();
        doc["cost_gap"] = std::abs(mod.cost - orc.value);
        doc["fd_gradient_norm"] = g.cwiseAbs().maxCoeff();
    }
    std::cout << doc.dump(2) << "\n";
    return 0;
}

int cmd_convergence(const Options& opt) {
    ocie::ProblemSpec spec = load_problem(opt);
    std::vector<int> ladder = opt.ladder;
    if (ladder.empty()) ladder = {17, 33, 65, 129, 257};
    if (ladder.size() < 2)
        throw ocie::ValidationError("convergence ladder needs at least two grid sizes");
    for (size_t k = 1; k < ladder.size(); ++k)
        if (ladder[k] <= ladder[k - 1])
            throw ocie::ValidationError("convergence ladder must be strictly increasing");

    StageTimer timer;
    std::vector<SolveResult> runs;
    Options solver_opt = opt;
    solver_opt.compare_paths = false;
    solver_opt.use_printed_k1 = false;
    for (int n : ladder) {
        spec.settings.grid_n = n;
        runs.push_back(run_solver(spec, grid_of(spec), solver_opt, timer));
    }

    const SolveResult& fine = runs.back();
    const int nf = ladder.back();
    ordered_json levels = ordered_json::array();
    std::vector<double> cost_err, ctrl_err;
    for (size_t k = 0; k < runs.size(); ++k) {
        ordered_json lvl{{"n", ladder[k]}, {"cost", runs[k].cost}};
        if (k + 1 < runs.size()) {
            const double ce = std::abs(runs[k].cost - fine.cost);
            cost_err.push_back(ce);
            lvl["cost_error"] = ce;
            if (spec.settings.rule == ocie::QuadratureRule::Trapezoid &&
                (nf - 1) % (ladder[k] - 1) == 0) {
                const int stride = (nf - 1) / (ladder[k] - 1);
                double ue = 0.0;
                for (int i = 0; i < ladder[k]; ++i)
                    ue = std::max(ue, (runs[k].u.row(i) - fine.u.row(i * stride))
                                          .cwiseAbs()
                                          .maxCoeff());
                ctrl_err.push_back(ue);
                lvl["control_error"] = ue;
            }
        }
        levels.push_back(std::move(lvl));
    }

    auto orders = [&](const std::vector<double>& err, size_t off) {
        ordered_json o = ordered_json::array();
        for (size_t k = 0; k + 1 < err.size(); ++k) {
            const double h1 = 1.0 / (ladder[k + off] - 1);
            const double h2 = 1.0 / (ladder[k + off + 1] - 1);
            if (err[k + 1] > 0 && err[k] > 0)
                o.push_back(std::log(err[k] / err[k + 1]) / std::log(h1 / h2));
            else
                o.push_back(nullptr);
        }
        return o;
    };

    ordered_json doc = base_report(spec);
    doc["grid"]["n"] = ordered_json(ladder);
    doc["levels"] = levels;
    doc["cost_orders"] = orders(cost_err, 0);
    if (!ctrl_err.empty()) doc["control_orders"] = orders(ctrl_err, 0);
    std::cout << doc.dump(2) << "\n";
    return 0;
}

void add_common(CLI::App* sub, Options& opt) {
    sub->add_option("--problem", opt.problem_path, "problem JSON file")->required();
    sub->add_option("--n", opt.n, "grid size override");
    sub->add_option("--rule", opt.rule, "quadrature rule: trapezoid|gauss");
    sub->add_option("--tol", opt.tol, "iteration tolerance override");
    sub->add_option("--max-iter", opt.max_iter, "iteration budget override");
    sub->add_option("--damping", opt.damping, "Picard damping override");
    sub->add_option("--out-dir", opt.out_dir, "directory for output files");
    sub->add_flag("--no-timings", opt.no_timings, "omit the timings block");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Optimal control of integral equations: solvers and oracles"};
    app.require_subcommand(1);
    Options opt;

    CLI::App* solve = app.add_subcommand("solve", "solve a problem file");
    add_common(solve, opt);
    solve->add_option("--out", opt.out, "outputs to write: json|csv|both")
        ->check(CLI::IsMember({"json", "csv", "both"}));
    solve->add_flag("--compare-paths", opt.compare_paths,
                    "also run the Volterra resolvent path");
    solve->add_flag("--use-printed-k1", opt.use_printed_k1,
                    "report the printed-formula K1 variant against the oracle");

    CLI::App* checkpd = app.add_subcommand("check-pd", "PD certificate at n and 2n-1");
    add_common(checkpd, opt);

    CLI::App* oracle = app.add_subcommand("oracle-compare", "module solver vs oracle");
    add_common(oracle, opt);

    CLI::App* conv = app.add_subcommand("convergence", "grid refinement study");
    add_common(conv, opt);
    conv->add_option("--ladder", opt.ladder, "grid sizes, coarse to fine");

    CLI11_PARSE(app, argc, argv);

    try {
        if (solve->parsed()) return cmd_solve(opt);
        if (checkpd->parsed()) return cmd_check_pd(opt);
        if (oracle->parsed()) return cmd_oracle_compare(opt);
        return cmd_convergence(opt);
    } catch (const ocie::ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return 2;
    } catch (const ocie::ValidationError& e) {
        std::cerr << "invalid problem: " << e.what() << "\n";
        return 2;
    } catch (const ocie::EvalError& e) {
        std::cerr << "evaluation error: " << e.what() << "\n";
        return 2;
    } catch (const ocie::NonConvergenceError& e) {
        std::cerr << "did not converge: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "solver failure: " << e.what() << "\n";
        return 3;
    }
}
