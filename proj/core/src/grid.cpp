#include "ocie/grid.hpp"

#include <cmath>
#include <numbers>

#include "ocie/errors.hpp"

namespace ocie {

namespace {

// Gauss-Legendre nodes/weights on [-1,1] by Newton iteration on the
// Legendre polynomial, then mapped to [a,b]. Standard gauleg construction.
void gauss_legendre(int n, Eigen::VectorXd& x, Eigen::VectorXd& w) {
    x.resize(n);
    w.resize(n);
    const int mid = (n + 1) / 2;
    for (int i = 0; i < mid; ++i) {
        double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p1 = 1.0, p2 = 0.0;
            for (int j = 0; j < n; ++j) {
                const double p3 = p2;
                p2 = p1;
                p1 = ((2.0 * j + 1.0) * z * p2 - j * p3) / (j + 1.0);
            }
            pp = n * (z * p1 - p2) / (z * z - 1.0);
            const double z1 = z;
            z = z1 - p1 / pp;
            if (std::abs(z - z1) < 1e-15) break;
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * pp * pp);
        w[n - 1 - i] = w[i];
    }
}

} // namespace

Grid Grid::make(double a, double b, int n, QuadratureRule rule) {
    if (!(a < b))
        throw ValidationError("grid bounds must satisfy a < b");
    if (n < 2)
        throw ValidationError("grid needs at least 2 nodes");

    Eigen::VectorXd nodes(n), weights(n);
    switch (rule) {
    case QuadratureRule::Trapezoid: {
        const double h = (b - a) / (n - 1);
        for (int i = 0; i < n; ++i) nodes[i] = a + h * i;
        nodes[n - 1] = b; // exact endpoint
        weights.setConstant(h);
        weights[0] = 0.5 * h;
        weights[n - 1] = 0.5 * h;
        break;
    }
    case QuadratureRule::GaussLegendre: {
        Eigen::VectorXd xr, wr;
        gauss_legendre(n, xr, wr);
        const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
        nodes = (xr.array() * half + mid).matrix();
        weights = wr * half;
        break;
    }
    }
    return Grid(a, b, std::move(nodes), std::move(weights), rule);
}

GridPtr make_grid(double a, double b, int n, QuadratureRule rule) {
    return std::make_shared<const Grid>(Grid::make(a, b, n, rule));
}

Eigen::VectorXd Grid::causal_weights(int i) const {
    if (rule_ != QuadratureRule::Trapezoid)
        throw ValidationError("causal quadrature requires the trapezoid rule");
    const int n = size();
    Eigen::VectorXd w = Eigen::VectorXd::Zero(n);
    if (i <= 0) return w; // integral over [a, a] is empty
    w[0] = 0.5 * (nodes_[1] - nodes_[0]);
    for (int j = 1; j < i; ++j) w[j] = 0.5 * (nodes_[j + 1] - nodes_[j - 1]);
    w[i] = 0.5 * (nodes_[i] - nodes_[i - 1]);
    return w;
}

Eigen::VectorXd Grid::anticausal_weights(int i) const {
    if (rule_ != QuadratureRule::Trapezoid)
        throw ValidationError("causal quadrature requires the trapezoid rule");
    const int n = size();
    Eigen::VectorXd w = Eigen::VectorXd::Zero(n);
    if (i >= n - 1) return w;
    w[i] = 0.5 * (nodes_[i + 1] - nodes_[i]);
    for (int j = i + 1; j < n - 1; ++j) w[j] = 0.5 * (nodes_[j + 1] - nodes_[j - 1]);
    w[n - 1] = 0.5 * (nodes_[n - 1] - nodes_[n - 2]);
    return w;
}

bool same_grid(const Grid& g1, const Grid& g2) {
    if (&g1 == &g2) return true;
    return g1.size() == g2.size() && g1.rule() == g2.rule() &&
           g1.nodes() == g2.nodes();
}

} // namespace ocie
