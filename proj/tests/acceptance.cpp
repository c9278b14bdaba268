// Acceptance suite: one line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include <json.hpp>

#include "helpers.hpp"
#include "ocie/errors.hpp"
#include "ocie/fredholm.hpp"
#include "ocie/instantiate.hpp"
#include "ocie/lq_fredholm.hpp"
#include "ocie/lq_volterra.hpp"
#include "ocie/nl_fredholm.hpp"
#include "ocie/oracle.hpp"
#include "ocie/problem.hpp"
#include "ocie/quadform.hpp"

using namespace ocie;
using testutil::stack_rows;

namespace {

int g_failures = 0;

void report(int idx, bool ok, const std::string& detail) {
    std::printf("%s criterion %d: %s\n", ok ? "PASS" : "FAIL", idx, detail.c_str());
    std::fflush(stdout);
    if (!ok) ++g_failures;
}

template <typename Fn>
void criterion(int idx, Fn&& fn) {
    try {
        fn();
    } catch (const std::exception& e) {
        report(idx, false, std::string("unexpected exception: ") + e.what());
    }
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

ProblemSpec load_spec(const std::string& name) {
    std::ifstream in(std::string(OCIE_PROBLEMS_DIR) + "/" + name);
    if (!in) throw std::runtime_error("missing problem file " + name);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_problem(buf.str());
}

std::string tmpdir() {
    char templ[] = "/tmp/ocie_accept_XXXXXX";
    if (!mkdtemp(templ)) throw std::runtime_error("mkdtemp failed");
    return templ;
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(OCIE_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    return WEXITSTATUS(std::system(cmd.c_str()));
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

// --- criterion 1: quadform minimizer vs QP oracle + minimum-value identities

void criterion1() {
    const auto t0 = std::chrono::steady_clock::now();
    std::mt19937 rng(1001);
    auto grid = make_grid(0.0, 1.0, 65, QuadratureRule::Trapezoid);
    double worst_gap = 0.0, worst_identity = 0.0;
    for (int rep = 0; rep < 20; ++rep) {
        const int n = rep < 10 ? 1 : 2;
        const auto s = testutil::rand_quadform_pd(rng, n, grid);
        const QuadFormSolution sol = minimize(testutil::sample_quadform(s, n, grid));
        const oracle::DiscreteQP qp =
            oracle::assemble_qp_quadform(*grid, n, s.K1, s.K2, s.r0);
        const oracle::QpResult o = oracle::qp_minimize(qp);
        worst_gap = std::max(worst_gap,
                             (stack_rows(sol.w_star.values()) - o.u).cwiseAbs().maxCoeff());
        const double rel = 1.0 + std::abs(sol.e_min);
        worst_identity = std::max(
            worst_identity,
            std::max(sol.min_value_identity_gap, sol.eq_identity_gap) / rel);
    }
    const double dt = seconds_since(t0);
    const bool ok = worst_gap <= 1e-8 && worst_identity <= 1e-8 && dt < 10.0;
    report(1, ok,
           "20 PD instances: max oracle gap " + fmt(worst_gap) +
               ", max identity gap " + fmt(worst_identity) + ", " + fmt(dt) + "s");
}

// --- criterion 2: extension identity on random pairs

void criterion2() {
    std::mt19937 rng(2002);
    auto grid = make_grid(0.0, 1.0, 33, QuadratureRule::Trapezoid);
    double worst = 0.0;
    for (int rep = 0; rep < 100; ++rep) {
        const int n = rep % 2 ? 2 : 1;
        const QuadFormProblem p{
            MatrixKernelField::sample_one(grid, n, n, testutil::rand_mat1(rng, n, n, 1.0)),
            MatrixKernelField::sample_two(grid, n, n, testutil::rand_mat2(rng, n, n, 1.0)),
            testutil::rand_gridfun(rng, grid, n)};
        const GridFunction w = testutil::rand_gridfun(rng, grid, n);
        const double e = eval_E(p, w);
        worst = std::max(worst,
                         std::abs(eval_E_extended(p, w, w) - e) / (1.0 + std::abs(e)));
    }
    report(2, worst <= 1e-10,
           "100 random pairs: max relative extension defect " + fmt(worst));
}

// --- criterion 3: stationarity solve vs reduced-form minimization

void criterion3() {
    std::mt19937 rng(3003);
    auto grid = make_grid(0.0, 1.0, 65, QuadratureRule::Trapezoid);
    double worst_gap = 0.0, worst_grad = 0.0;
    int built = 0;
    while (built < 20) {
        const int n = built < 15 ? 1 : 2;
        const auto s = testutil::rand_lq(rng, n, 1, 0.1);
        const FredholmLQProblem p = testutil::sample_fredholm(s, n, 1, grid);
        const ReducedState rs = reduce_state(p);
        const ReducedForm rf = assemble_reduced_form(p, rs);
        if (certify_pd(symmetrize(rf.form)).verdict != PdVerdict::PositiveDefinite)
            continue;
        ++built;

        const GridFunction u1 = solve_stationarity(p, rs);
        const QuadFormSolution qs = minimize(rf.form);
        worst_gap = std::max(
            worst_gap, (u1.values() - qs.w_star.values()).cwiseAbs().maxCoeff());

        auto cost = [&](const Eigen::VectorXd& u) {
            return oracle::direct_cost_fredholm(*grid, n, 1, s.A, s.B, s.state0, s.P,
                                                s.Q, s.R, u);
        };
        worst_grad = std::max(
            worst_grad,
            oracle::fd_gradient(cost, stack_rows(u1.values()), 1e-6)
                .cwiseAbs()
                .maxCoeff());
    }
    const bool ok = worst_gap <= 1e-8 && worst_grad <= 1e-5;
    report(3, ok,
           "20 PD instances: max two-path gap " + fmt(worst_gap) +
               ", max FD gradient at u* " + fmt(worst_grad));
}

// --- criterion 4: Volterra joint path, resolvent path, QP oracle

void criterion4() {
    const auto t0 = std::chrono::steady_clock::now();
    std::mt19937 rng(4004);
    auto grid = make_grid(0.0, 1.0, 129, QuadratureRule::Trapezoid);
    double worst = 0.0;
    int built = 0;
    while (built < 25) {
        const int n = built < 20 ? 1 : 2;
        const auto s = testutil::rand_lq(rng, n, 1, 0.1);
        const VolterraLQProblem p = testutil::sample_volterra(s, n, 1, grid);
        const oracle::DiscreteQP qp =
            oracle::assemble_qp_volterra(*grid, n, 1, s.A, s.B, s.state0, s.P, s.Q, s.R);
        const oracle::QpResult o = oracle::qp_minimize(qp);
        if (!o.hessian_pd) continue;
        ++built;

        const VolterraDerived d = derived_kernels(p);
        const Eigen::VectorXd u_joint = stack_rows(solve_joint(p, d).u_star.values());
        const Eigen::VectorXd u_res =
            stack_rows(solve_resolvent_path(p, d).u_star.values());
        worst = std::max({worst, (u_joint - u_res).cwiseAbs().maxCoeff(),
                          (u_joint - o.u).cwiseAbs().maxCoeff(),
                          (u_res - o.u).cwiseAbs().maxCoeff()});
    }
    const double dt = seconds_since(t0);
    report(4, worst <= 1e-6 && dt < 60.0,
           "25 instances at N=129: max three-way gap " + fmt(worst) + ", " + fmt(dt) +
               "s");
}

// --- criterion 5: printed-variant discrepancy report through the CLI

void criterion5() {
    const std::string dir = tmpdir();
    const int rc = run_cli("solve --problem " + std::string(OCIE_PROBLEMS_DIR) +
                           "/volterra_smooth.json --use-printed-k1 --no-timings "
                           "--out-dir " + dir);
    if (rc != 0) {
        report(5, false, "CLI exited with code " + std::to_string(rc));
        return;
    }
    const auto doc = nlohmann::json::parse(slurp(dir + "/solution.json"));
    if (!doc.contains("printed_k1_report")) {
        report(5, false, "no printed_k1_report in solution.json");
        return;
    }
    const double derived = doc["printed_k1_report"]["derived_oracle_gap"].get<double>();
    const double printed = doc["printed_k1_report"]["printed_oracle_gap"].get<double>();
    report(5, derived <= 1e-6,
           "report produced; derived variant gap " + fmt(derived) +
               " (printed variant gap " + fmt(printed) + ", no claim)");
}

// --- criterion 6: nonlinear module, LQ specialization + manufactured solution

void criterion6() {
    // (a) LQ specialization against the linear solver
    auto grid = make_grid(0.0, 1.0, 65, QuadratureRule::Trapezoid);
    const NonlinearFredholmProblem nl =
        make_nonlinear_fredholm(load_spec("nl_fredholm_lq.json"), grid);
    const CoupledSolution cs = solve_coupled(nl, PicardSettings{1e-13, 500, 0.9});
    const LQSolution ls = solve(make_fredholm_lq(load_spec("fredholm_lq_desk.json"), grid));
    const double lq_gap =
        (cs.u_star.values() - ls.u_star.values()).cwiseAbs().maxCoeff();

    // (b) manufactured solution at N = 129: pick the state 1 + x and control
    // sin(x), then back out phi0 nodally so the discrete optimum is exact.
    auto fine = make_grid(0.0, 1.0, 129, QuadratureRule::Trapezoid);
    NonlinearFredholmProblem m{.phi0 = GridFunction(fine, 1)};
    m.f = [](double x, double y, const Eigen::VectorXd& p) {
        return Eigen::VectorXd::Constant(1, 0.2 * x * y * std::sin(p[0]));
    };
    m.F = [](double, double, const Eigen::VectorXd&) {
        return Eigen::MatrixXd::Identity(1, 1);
    };
    m.g0 = [](double x, const Eigen::VectorXd& p) {
        const double d = p[0] - (1.0 + x);
        return 0.5 * d * d;
    };
    m.g1 = [](double x, const Eigen::VectorXd&) {
        return Eigen::VectorXd::Constant(1, -std::sin(x));
    };
    m.G = [](double, const Eigen::VectorXd&) { return Eigen::MatrixXd::Identity(1, 1); };
    m.grad_f = [](double x, double y, const Eigen::VectorXd& p) {
        return Eigen::MatrixXd::Constant(1, 1, 0.2 * x * y * std::cos(p[0]));
    };
    m.grad_F = [](double, double, const Eigen::VectorXd&) {
        return std::vector<Eigen::MatrixXd>{Eigen::MatrixXd::Zero(1, 1)};
    };
    m.grad_g0 = [](double x, const Eigen::VectorXd& p) {
        return Eigen::RowVectorXd::Constant(1, p[0] - (1.0 + x));
    };
    m.grad_g1 = [](double, const Eigen::VectorXd&) {
        return Eigen::MatrixXd::Zero(1, 1);
    };
    m.grad_G = [](double, const Eigen::VectorXd&) {
        return std::vector<Eigen::MatrixXd>{Eigen::MatrixXd::Zero(1, 1)};
    };
    // phi0 from the target state phi(x) = 1 + x under u(x) = sin(x)
    Eigen::MatrixXd phi0(fine->size(), 1);
    for (int i = 0; i < fine->size(); ++i) {
        const double xi = fine->node(i);
        double acc = 1.0 + xi;
        for (int j = 0; j < fine->size(); ++j) {
            const double yj = fine->node(j);
            acc -= fine->weight(j) *
                   (0.2 * xi * yj * std::sin(1.0 + yj) + std::sin(yj));
        }
        phi0(i, 0) = acc;
    }
    m.phi0 = GridFunction(fine, std::move(phi0));

    validate_gradients(m); // (d) for the manufactured instance
    const CoupledSolution ms = solve_coupled(m, PicardSettings{1e-12, 500, 0.9});
    double recovery = 0.0;
    for (int i = 0; i < fine->size(); ++i) {
        recovery = std::max(recovery,
                            std::abs(ms.u_star.at(i)[0] - std::sin(fine->node(i))));
        recovery = std::max(recovery,
                            std::abs(ms.iterate.phi.at(i)[0] - (1.0 + fine->node(i))));
    }

    // (c) Hamiltonian u-gradient at u* over all nodes, central differences
    double hgrad = 0.0;
    for (int k = 0; k < grid->size(); ++k) {
        const double x = grid->node(k);
        const Eigen::VectorXd phik = cs.iterate.phi.at(k);
        Eigen::VectorXd up = cs.u_star.at(k), um = cs.u_star.at(k);
        const double step = 1e-6;
        up[0] += step;
        um[0] -= step;
        hgrad = std::max(hgrad, std::abs(hamiltonian(x, phik, up, cs.iterate.psi, nl) -
                                         hamiltonian(x, phik, um, cs.iterate.psi, nl)) /
                                    (2 * step));
    }

    // (d) FD validation of all supplied gradient expressions in the corpus
    bool grads_ok = true;
    for (const char* name : {"nl_fredholm_lq.json", "nl_fredholm_nonlinear.json"}) {
        try {
            validate_gradients(make_nonlinear_fredholm(load_spec(name), grid));
        } catch (const ValidationError&) {
            grads_ok = false;
        }
    }

    const bool ok = lq_gap <= 1e-6 && recovery <= 5e-6 && hgrad <= 1e-7 && grads_ok;
    report(6, ok,
           "LQ specialization gap " + fmt(lq_gap) + ", manufactured recovery " +
               fmt(recovery) + ", Hamiltonian u-gradient " + fmt(hgrad) +
               (grads_ok ? ", gradient expressions validated"
                         : ", gradient validation FAILED"));
}

// --- criterion 7: convergence orders + resolvent identity

double cost_at(const ProblemSpec& spec_in, int n) {
    ProblemSpec spec = spec_in;
    spec.settings.grid_n = n;
    auto grid = make_grid(spec.a, spec.b, n, spec.settings.rule);
    if (spec.kind == ProblemKind::FredholmLQ)
        return solve(make_fredholm_lq(spec, grid)).cost;
    const VolterraLQProblem p = make_volterra_lq(spec, grid);
    return solve_joint(p, derived_kernels(p)).cost;
}

void criterion7() {
    const std::vector<int> ladder = {17, 33, 65, 129, 257};
    double min_order = 1e9;
    for (const char* name : {"fredholm_lq_smooth.json", "volterra_smooth.json"}) {
        const ProblemSpec spec = load_spec(name);
        std::vector<double> costs;
        for (int n : ladder) costs.push_back(cost_at(spec, n));
        for (size_t k = 0; k + 2 < ladder.size(); ++k) {
            const double e1 = std::abs(costs[k] - costs.back());
            const double e2 = std::abs(costs[k + 1] - costs.back());
            min_order = std::min(min_order, std::log2(e1 / e2));
        }
    }

    std::mt19937 rng(7007);
    auto grid = make_grid(0.0, 1.0, 33, QuadratureRule::Trapezoid);
    double worst_resolvent = 0.0;
    for (int rep = 0; rep < 5; ++rep) {
        const auto A = MatrixKernelField::sample_two(
            grid, 1, 1, [f = testutil::rand_fn2(rng, 0.4)](double x, double y) {
                return Eigen::MatrixXd::Constant(1, 1, f(x, y));
            });
        const ResolventKernel rk = resolvent(A);
        const int nn = grid->size();
        const Eigen::VectorXd& w = grid->weights();
        Eigen::MatrixXd IA = Eigen::MatrixXd::Identity(nn, nn);
        Eigen::MatrixXd IK = Eigen::MatrixXd::Identity(nn, nn);
        for (int i = 0; i < nn; ++i)
            for (int j = 0; j < nn; ++j) {
                IA(i, j) -= w[j] * A.block(i, j)(0, 0);
                IK(i, j) += w[j] * rk.resolvent.block(i, j)(0, 0);
            }
        worst_resolvent = std::max(
            worst_resolvent,
            (IA * IK - Eigen::MatrixXd::Identity(nn, nn)).cwiseAbs().maxCoeff());
    }

    report(7, min_order >= 1.9 && worst_resolvent <= 1e-10,
           "min observed cost order " + fmt(min_order) + ", max resolvent defect " +
               fmt(worst_resolvent));
}

// --- criterion 8: Fredholm alternative, failing branch

void criterion8() {
    auto grid = make_grid(0.0, 1.0, 33, QuadratureRule::Trapezoid);
    const auto K = MatrixKernelField::sample_two(grid, 1, 1, [](double, double) {
        return Eigen::MatrixXd::Constant(1, 1, 1.0); // unit eigenvalue on [0,1]
    });
    const auto g = GridFunction::sample_scalar(grid, [](double x) { return x; });
    try {
        (void)solve_second_kind(K, g, 1);
        report(8, false, "singular rank-one kernel was not rejected");
    } catch (const SingularOperatorError&) {
        report(8, true, "rank-one kernel at the unit eigenvalue raises "
                        "SingularOperatorError");
    }
}

// --- criterion 9: byte-identical solution.json over the golden corpus

void criterion9() {
    const std::vector<std::string> corpus = {
        "quadform_scalar.json",  "quadform_vec2.json",    "fredholm_lq_desk.json",
        "fredholm_lq_smooth.json", "volterra_desk.json",  "volterra_smooth.json",
        "nl_fredholm_lq.json",   "nl_fredholm_nonlinear.json"};
    for (const std::string& name : corpus) {
        const std::string d1 = tmpdir(), d2 = tmpdir();
        const std::string base = "solve --problem " + std::string(OCIE_PROBLEMS_DIR) +
                                 "/" + name + " --no-timings --out-dir ";
        if (run_cli(base + d1) != 0 || run_cli(base + d2) != 0) {
            report(9, false, name + ": CLI run failed");
            return;
        }
        const std::string s1 = slurp(d1 + "/solution.json");
        if (s1.empty() || s1 != slurp(d2 + "/solution.json")) {
            report(9, false, name + ": solution.json differs between runs");
            return;
        }
    }
    report(9, true,
           "byte-identical solution.json across two runs for all " +
               std::to_string(corpus.size()) + " corpus problems");
}

} // namespace

int main() {
    criterion(1, criterion1);
    criterion(2, criterion2);
    criterion(3, criterion3);
    criterion(4, criterion4);
    criterion(5, criterion5);
    criterion(6, criterion6);
    criterion(7, criterion7);
    criterion(8, criterion8);
    criterion(9, criterion9);
    if (g_failures) {
        std::printf("%d criterion(s) failed\n", g_failures);
        return 1;
    }
    std::printf("all 9 criteria passed\n");
    return 0;
}
