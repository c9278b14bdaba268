#include <doctest.h>

#include <random>

#include "helpers.hpp"
#include "ocie/errors.hpp"
#include "ocie/quadform.hpp"

using namespace ocie;

namespace {

QuadFormProblem rank_one(GridPtr grid, double sigma) {
    // K2(x,y) = sigma on [0,1] with K1 = I: the weighted operator has the
    // single nonzero eigenvalue sigma.
    return QuadFormProblem{
        MatrixKernelField::sample_one(grid, 1, 1,
                                      [](double) { return Eigen::MatrixXd::Identity(1, 1); }),
        MatrixKernelField::sample_two(grid, 1, 1,
                                      [sigma](double, double) {
                                          return Eigen::MatrixXd::Constant(1, 1, sigma);
                                      }),
        GridFunction::sample_scalar(grid, [](double x) { return x; })};
}

} // namespace

TEST_CASE("E splits into quadratic and linear parts") {
    std::mt19937 rng(11);
    auto grid = make_grid(0.0, 1.0, 21, QuadratureRule::Trapezoid);
    for (int rep = 0; rep < 10; ++rep) {
        const auto s = testutil::rand_quadform_pd(rng, 2, grid);
        const QuadFormProblem p = testutil::sample_quadform(s, 2, grid);
        const GridFunction w = testutil::rand_gridfun(rng, grid, 2);
        double lin = inner_product(p.r0, w);
        CHECK(eval_E(p, w) == doctest::Approx(eval_Eq(p, w) + lin).epsilon(1e-12));
    }
}

TEST_CASE("symmetrize leaves E invariant") {
    std::mt19937 rng(13);
    auto grid = make_grid(0.0, 1.0, 21, QuadratureRule::Trapezoid);
    const QuadFormProblem p{
        MatrixKernelField::sample_one(
            grid, 2, 2, testutil::rand_mat1(rng, 2, 2, 1.0)),
        MatrixKernelField::sample_two(
            grid, 2, 2, testutil::rand_mat2(rng, 2, 2, 1.0)),
        testutil::rand_gridfun(rng, grid, 2)};
    const QuadFormProblem ps = symmetrize(p);
    for (int rep = 0; rep < 5; ++rep) {
        const GridFunction w = testutil::rand_gridfun(rng, grid, 2);
        CHECK(eval_E(p, w) == doctest::Approx(eval_E(ps, w)).epsilon(1e-12));
    }
}

TEST_CASE("extension agrees with E on the diagonal") {
    std::mt19937 rng(17);
    auto grid = make_grid(0.0, 1.0, 17, QuadratureRule::Trapezoid);
    for (int rep = 0; rep < 10; ++rep) {
        const auto s = testutil::rand_quadform_pd(rng, 1, grid);
        const QuadFormProblem p =
            symmetrize(testutil::sample_quadform(s, 1, grid));
        const GridFunction w = testutil::rand_gridfun(rng, grid, 1);
        const double e = eval_E(p, w);
        CHECK(eval_E_extended(p, w, w) ==
              doctest::Approx(e).epsilon(1e-10).scale(1.0 + std::abs(e)));
    }
}

TEST_CASE("certificate verdicts") {
    auto grid = make_grid(0.0, 1.0, 33, QuadratureRule::Trapezoid);

    SUBCASE("identity K1, zero K2 is positive definite with zero eigenvalue") {
        QuadFormProblem p = rank_one(grid, 0.0);
        const PdCertificate c = certify_pd(p);
        CHECK(c.verdict == PdVerdict::PositiveDefinite);
        CHECK(c.min_eigenvalue == doctest::Approx(0.0));
        CHECK(c.k1_spd);
        CHECK(c.grid_n == 33);
    }
    SUBCASE("rank-one -2 kernel is indefinite") {
        const PdCertificate c = certify_pd(rank_one(grid, -2.0));
        CHECK(c.verdict == PdVerdict::Indefinite);
        CHECK(c.min_eigenvalue == doctest::Approx(-2.0).epsilon(1e-10));
    }
    SUBCASE("rank-one -1 kernel sits on the semidefinite boundary") {
        const PdCertificate c = certify_pd(rank_one(grid, -1.0));
        CHECK(c.verdict == PdVerdict::PositiveSemiDefinite);
    }
    SUBCASE("non-SPD K1 downgrades the verdict") {
        QuadFormProblem p = rank_one(grid, 0.0);
        p.K1.block(3) = -Eigen::MatrixXd::Identity(1, 1);
        const PdCertificate c = certify_pd(p);
        CHECK(!c.k1_spd);
        CHECK(c.verdict == PdVerdict::Indefinite);
    }
}

TEST_CASE("minimize satisfies the minimum-value identities") {
    std::mt19937 rng(19);
    auto grid = make_grid(0.0, 1.0, 33, QuadratureRule::Trapezoid);
    for (int rep = 0; rep < 5; ++rep) {
        const auto s = testutil::rand_quadform_pd(rng, 1, grid);
        const QuadFormSolution sol = minimize(testutil::sample_quadform(s, 1, grid));
        CHECK(!sol.stationary_only);
        CHECK(sol.min_value_identity_gap <= 1e-10 * (1.0 + std::abs(sol.e_min)));
        CHECK(sol.eq_identity_gap <= 1e-10 * (1.0 + std::abs(sol.e_min)));
        CHECK(sol.e_min <= 0.0); // E(0) = 0 is always available
    }
}

TEST_CASE("minimize flags a stationary-only solution on indefinite forms") {
    auto grid = make_grid(0.0, 1.0, 17, QuadratureRule::Trapezoid);
    const QuadFormSolution sol = minimize(rank_one(grid, -2.5));
    CHECK(sol.stationary_only);
}

TEST_CASE("minimize rejects singular K1") {
    auto grid = make_grid(0.0, 1.0, 9, QuadratureRule::Trapezoid);
    QuadFormProblem p = rank_one(grid, 0.0);
    p.K1.block(2).setZero();
    CHECK_THROWS_AS((void)minimize(p), SingularOperatorError);
}
