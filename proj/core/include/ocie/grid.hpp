#pragma once

#include <Eigen/Dense>
#include <memory>

namespace ocie {

enum class QuadratureRule { Trapezoid, GaussLegendre };

/// Quadrature grid on an interval [a, b]: strictly increasing nodes with
/// positive weights summing to b - a. Immutable after construction.
class Grid {
public:
    static Grid make(double a, double b, int n, QuadratureRule rule);

    double a() const noexcept { return a_; }
    double b() const noexcept { return b_; }
    int size() const noexcept { return static_cast<int>(nodes_.size()); }
    QuadratureRule rule() const noexcept { return rule_; }
    const Eigen::VectorXd& nodes() const noexcept { return nodes_; }
    const Eigen::VectorXd& weights() const noexcept { return weights_; }
    double node(int i) const { return nodes_[i]; }
    double weight(int i) const { return weights_[i]; }

    /// Trapezoid weights for the moving-endpoint integral over [a, node(i)],
    /// re-derived per row so the O(h^2) order survives at the endpoint.
    /// Entry j is zero for j > i. Requires the trapezoid rule (the causal
    /// triangle has no natural restriction of Gauss nodes).
    Eigen::VectorXd causal_weights(int i) const;

    /// Trapezoid weights for the integral over [node(i), b].
    Eigen::VectorXd anticausal_weights(int i) const;

private:
    Grid(double a, double b, Eigen::VectorXd nodes, Eigen::VectorXd weights,
         QuadratureRule rule)
        : a_(a), b_(b), nodes_(std::move(nodes)), weights_(std::move(weights)),
          rule_(rule) {}

    double a_;
    double b_;
    Eigen::VectorXd nodes_;
    Eigen::VectorXd weights_;
    QuadratureRule rule_;
};

using GridPtr = std::shared_ptr<const Grid>;

GridPtr make_grid(double a, double b, int n, QuadratureRule rule);

/// Two grids are interchangeable when they discretize the same interval
/// with the same nodes.
bool same_grid(const Grid& g1, const Grid& g2);

} // namespace ocie
