#pragma once

#include <Eigen/Dense>
#include <functional>

#include "ocie/grid.hpp"

namespace ocie {

/// Vector-valued function sampled on a grid. Row i holds the value at
/// node i; immutable value semantics throughout the solvers.
class GridFunction {
public:
    GridFunction(GridPtr grid, int dim);
    GridFunction(GridPtr grid, Eigen::MatrixXd values);

    static GridFunction sample(GridPtr grid, int dim,
                               const std::function<Eigen::VectorXd(double)>& fn);
    static GridFunction sample_scalar(GridPtr grid,
                                      const std::function<double(double)>& fn);

    const GridPtr& grid() const noexcept { return grid_; }
    int dim() const noexcept { return static_cast<int>(values_.cols()); }
    int size() const noexcept { return static_cast<int>(values_.rows()); }
    const Eigen::MatrixXd& values() const noexcept { return values_; }
    Eigen::MatrixXd& values() noexcept { return values_; }
    Eigen::VectorXd at(int i) const { return values_.row(i).transpose(); }

    double max_norm() const { return values_.size() ? values_.cwiseAbs().maxCoeff() : 0.0; }

private:
    GridPtr grid_;
    Eigen::MatrixXd values_; // N x dim
};

/// Weighted L2 pairing: sum_i w_i f_i . g_i.
double inner_product(const GridFunction& f, const GridFunction& g);

} // namespace ocie
