#include <doctest.h>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sys/wait.h>
#include <sstream>
#include <string>

namespace {

const std::string kCli = OCIE_CLI_PATH;
const std::string kProblems = OCIE_PROBLEMS_DIR;

int run(const std::string& args) {
    const std::string cmd = kCli + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::string tmpdir() {
    char templ[] = "/tmp/ocie_cli_XXXXXX";
    REQUIRE(mkdtemp(templ) != nullptr);
    return templ;
}

} // namespace

TEST_CASE("solve writes a versioned solution with a cost field") {
    const std::string dir = tmpdir();
    CHECK(run("solve --problem " + kProblems + "/quadform_scalar.json --n 17 "
              "--out json --out-dir " + dir) == 0);
    const std::string doc = slurp(dir + "/solution.json");
    CHECK(doc.find("\"schema_version\": 1") != std::string::npos);
    CHECK(doc.find("\"cost\":") != std::string::npos);
    CHECK(doc.find("\"u_star\":") != std::string::npos);
}

TEST_CASE("csv output carries node, coordinate, and component columns") {
    const std::string dir = tmpdir();
    CHECK(run("solve --problem " + kProblems + "/volterra_desk.json --n 9 "
              "--out csv --out-dir " + dir) == 0);
    const std::string csv = slurp(dir + "/solution.csv");
    CHECK(csv.rfind("node,t,u_1,state_1,costate_1", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 10); // header + 9 nodes
}

TEST_CASE("identical runs are byte-identical with --no-timings") {
    const std::string d1 = tmpdir(), d2 = tmpdir();
    const std::string args = "solve --problem " + kProblems +
                             "/fredholm_lq_desk.json --no-timings --out-dir ";
    CHECK(run(args + d1) == 0);
    CHECK(run(args + d2) == 0);
    CHECK(slurp(d1 + "/solution.json") == slurp(d2 + "/solution.json"));
    CHECK(!slurp(d1 + "/solution.json").empty());
}

TEST_CASE("exit code 2 on parse and validation failures") {
    CHECK(run("solve --problem /nonexistent.json") == 2);

    const std::string dir = tmpdir();
    std::ofstream(dir + "/bad.json") << "{ not json";
    CHECK(run("solve --problem " + dir + "/bad.json") == 2);

    std::ofstream(dir + "/unknown_key.json") << R"json({"kind":"quadform",
      "domain":{"a":0,"b":1},"dims":{"n":1},"surprise":true,
      "kernels":{"K1":[["1"]],"K2":[["0"]],"r0":[["0"]]}})json";
    CHECK(run("solve --problem " + dir + "/unknown_key.json") == 2);

    CHECK(run("convergence --problem " + kProblems +
              "/quadform_scalar.json --ladder 17") == 2);
}

TEST_CASE("exit code 3 when the Fredholm alternative fails") {
    const std::string dir = tmpdir();
    // A(x,y) = 1 on [0,1] puts a unit eigenvalue in the dynamics
    std::ofstream(dir + "/singular.json") << R"json({"kind":"fredholm_lq",
      "domain":{"a":0,"b":1},"dims":{"n":1,"m":1},
      "kernels":{"A":[["1"]],"B":[["1"]],"phi0":[["1"]],
      "P":[["1"]],"Q":[["0"]],"R":[["1"]]}})json";
    CHECK(run("solve --problem " + dir + "/singular.json --n 17") == 3);
}

TEST_CASE("exit code 4 when the iteration budget is exhausted") {
    CHECK(run("solve --problem " + kProblems +
              "/nl_fredholm_nonlinear.json --max-iter 2 --tol 1e-14") == 4);
}

TEST_CASE("volterra flags: path comparison and printed-variant report") {
    const std::string dir = tmpdir();
    CHECK(run("solve --problem " + kProblems + "/volterra_desk.json --n 17 "
              "--compare-paths --use-printed-k1 --no-timings --out-dir " + dir) == 0);
    const std::string doc = slurp(dir + "/solution.json");
    CHECK(doc.find("\"path_agreement\":") != std::string::npos);
    CHECK(doc.find("\"printed_k1_report\":") != std::string::npos);
    CHECK(doc.find("\"derived_oracle_gap\":") != std::string::npos);
}

TEST_CASE("check-pd reports certificates at two grid sizes") {
    const std::string cmd = kCli + " check-pd --problem " + kProblems +
                            "/quadform_scalar.json --n 17 2>/dev/null";
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    std::string out;
    char buf[512];
    while (fgets(buf, sizeof buf, pipe)) out += buf;
    CHECK(WEXITSTATUS(pclose(pipe)) == 0);
    CHECK(out.find("\"certificates\":") != std::string::npos);
    CHECK(out.find("\"grid_n\": 17") != std::string::npos);
    CHECK(out.find("\"grid_n\": 33") != std::string::npos);
    CHECK(out.find("\"verdict_stable\": true") != std::string::npos);
}
