#pragma once

// Random smooth instance builders shared by the unit and acceptance suites.
// Everything is sampler-based (plain callables) so the same instance can feed
// both the module solvers (via MatrixKernelField sampling) and the oracle.

#include <cmath>
#include <functional>
#include <random>
#include <stdexcept>
#include <vector>

#include "ocie/grid_function.hpp"
#include "ocie/kernel_field.hpp"
#include "ocie/lq_fredholm.hpp"
#include "ocie/lq_volterra.hpp"
#include "ocie/quadform.hpp"

namespace testutil {

using Fn1 = std::function<double(double)>;
using Fn2 = std::function<double(double, double)>;
using Mat1 = std::function<Eigen::MatrixXd(double)>;
using Mat2 = std::function<Eigen::MatrixXd(double, double)>;
using Vec1 = std::function<Eigen::VectorXd(double)>;

inline Fn1 rand_fn1(std::mt19937& rng, double scale) {
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    const double c0 = U(rng), c1 = U(rng), c2 = U(rng);
    const int k = 1 + static_cast<int>(rng() % 3);
    return [=](double x) { return scale * (c0 + c1 * x + c2 * std::sin(k * x)); };
}

inline Fn2 rand_fn2(std::mt19937& rng, double scale) {
    Fn1 f = rand_fn1(rng, 1.0), g = rand_fn1(rng, 1.0);
    const double c = std::uniform_real_distribution<double>(-1.0, 1.0)(rng);
    return [=](double x, double y) {
        return scale * (f(x) * g(y) + c * std::exp(-(x - y) * (x - y)));
    };
}

inline Mat1 rand_mat1(std::mt19937& rng, int r, int c, double scale) {
    std::vector<Fn1> fs;
    for (int i = 0; i < r * c; ++i) fs.push_back(rand_fn1(rng, scale));
    return [fs, r, c](double x) {
        Eigen::MatrixXd m(r, c);
        for (int i = 0; i < r; ++i)
            for (int j = 0; j < c; ++j) m(i, j) = fs[i * c + j](x);
        return m;
    };
}

inline Mat2 rand_mat2(std::mt19937& rng, int r, int c, double scale) {
    std::vector<Fn2> fs;
    for (int i = 0; i < r * c; ++i) fs.push_back(rand_fn2(rng, scale));
    return [fs, r, c](double x, double y) {
        Eigen::MatrixXd m(r, c);
        for (int i = 0; i < r; ++i)
            for (int j = 0; j < c; ++j) m(i, j) = fs[i * c + j](x, y);
        return m;
    };
}

inline Vec1 rand_vec1(std::mt19937& rng, int n, double scale) {
    std::vector<Fn1> fs;
    for (int i = 0; i < n; ++i) fs.push_back(rand_fn1(rng, scale));
    return [fs, n](double x) {
        Eigen::VectorXd v(n);
        for (int i = 0; i < n; ++i) v[i] = fs[i](x);
        return v;
    };
}

inline Mat1 rand_spd1(std::mt19937& rng, int n, double base) {
    Mat1 raw = rand_mat1(rng, n, n, 0.3);
    return [raw, base, n](double x) {
        const Eigen::MatrixXd m = raw(x);
        return Eigen::MatrixXd(m * m.transpose() +
                               base * Eigen::MatrixXd::Identity(n, n));
    };
}

struct QuadFormSamplers {
    Mat1 K1;
    Mat2 K2;
    Vec1 r0;
};

inline ocie::QuadFormProblem sample_quadform(const QuadFormSamplers& s, int n,
                                             ocie::GridPtr grid) {
    return ocie::QuadFormProblem{
        ocie::MatrixKernelField::sample_one(grid, n, n, s.K1),
        ocie::MatrixKernelField::sample_two(grid, n, n, s.K2),
        ocie::GridFunction::sample(grid, n, s.r0)};
}

/// Random instance, rescaling K2 until the certificate at `grid` says PD.
inline QuadFormSamplers rand_quadform_pd(std::mt19937& rng, int n,
                                         ocie::GridPtr grid) {
    QuadFormSamplers s;
    s.K1 = rand_spd1(rng, n, 1.0);
    Mat2 raw = rand_mat2(rng, n, n, 1.0);
    s.r0 = rand_vec1(rng, n, 1.0);
    double scale = 0.5;
    for (int attempt = 0; attempt < 40; ++attempt) {
        s.K2 = [raw, scale](double x, double y) {
            return Eigen::MatrixXd(
                0.5 * scale * (raw(x, y) + raw(y, x).transpose()));
        };
        const auto cert =
            ocie::certify_pd(ocie::symmetrize(sample_quadform(s, n, grid)));
        if (cert.verdict == ocie::PdVerdict::PositiveDefinite) return s;
        scale *= 0.5;
    }
    throw std::runtime_error("failed to build a PD quadform instance");
}

struct LQSamplers {
    Mat2 A, B;
    Vec1 state0;
    Mat1 P, Q, R;
};

inline LQSamplers rand_lq(std::mt19937& rng, int n, int m, double q_scale) {
    LQSamplers s;
    s.A = rand_mat2(rng, n, n, 0.3 / n);
    s.B = rand_mat2(rng, n, m, 0.8);
    s.state0 = rand_vec1(rng, n, 1.0);
    s.P = rand_spd1(rng, n, 0.3);
    s.Q = rand_mat1(rng, n, m, q_scale);
    s.R = rand_spd1(rng, m, 1.0);
    return s;
}

inline ocie::FredholmLQProblem sample_fredholm(const LQSamplers& s, int n, int m,
                                               ocie::GridPtr grid) {
    return ocie::FredholmLQProblem{
        ocie::MatrixKernelField::sample_two(grid, n, n, s.A),
        ocie::MatrixKernelField::sample_two(grid, n, m, s.B),
        ocie::GridFunction::sample(grid, n, s.state0),
        ocie::MatrixKernelField::sample_one(grid, n, n, s.P),
        ocie::MatrixKernelField::sample_one(grid, n, m, s.Q),
        ocie::MatrixKernelField::sample_one(grid, m, m, s.R)};
}

inline ocie::VolterraLQProblem sample_volterra(const LQSamplers& s, int n, int m,
                                               ocie::GridPtr grid) {
    return ocie::VolterraLQProblem{
        ocie::MatrixKernelField::sample_two(grid, n, n, s.A),
        ocie::MatrixKernelField::sample_two(grid, n, m, s.B),
        ocie::GridFunction::sample(grid, n, s.state0),
        ocie::MatrixKernelField::sample_one(grid, n, n, s.P),
        ocie::MatrixKernelField::sample_one(grid, n, m, s.Q),
        ocie::MatrixKernelField::sample_one(grid, m, m, s.R)};
}

inline ocie::GridFunction rand_gridfun(std::mt19937& rng, ocie::GridPtr grid, int dim) {
    return ocie::GridFunction::sample(grid, dim, rand_vec1(rng, dim, 1.0));
}

inline Eigen::VectorXd stack_rows(const Eigen::MatrixXd& m) {
    Eigen::VectorXd v(m.rows() * m.cols());
    for (int i = 0; i < m.rows(); ++i)
        v.segment(i * m.cols(), m.cols()) = m.row(i).transpose();
    return v;
}

} // namespace testutil
