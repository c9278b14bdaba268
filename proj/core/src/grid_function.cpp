#include "ocie/grid_function.hpp"

#include <stdexcept>

namespace ocie {

GridFunction::GridFunction(GridPtr grid, int dim)
    : grid_(std::move(grid)), values_(Eigen::MatrixXd::Zero(grid_->size(), dim)) {
    if (dim < 1) throw std::invalid_argument("GridFunction dim must be positive");
}

GridFunction::GridFunction(GridPtr grid, Eigen::MatrixXd values)
    : grid_(std::move(grid)), values_(std::move(values)) {
    if (values_.rows() != grid_->size())
        throw std::invalid_argument("GridFunction row count must equal grid node count");
}

GridFunction GridFunction::sample(GridPtr grid, int dim,
                                  const std::function<Eigen::VectorXd(double)>& fn) {
    Eigen::MatrixXd values(grid->size(), dim);
    for (int i = 0; i < grid->size(); ++i)
        values.row(i) = fn(grid->node(i)).transpose();
    return GridFunction(std::move(grid), std::move(values));
}

GridFunction GridFunction::sample_scalar(GridPtr grid,
                                         const std::function<double(double)>& fn) {
    Eigen::MatrixXd values(grid->size(), 1);
    for (int i = 0; i < grid->size(); ++i) values(i, 0) = fn(grid->node(i));
    return GridFunction(std::move(grid), std::move(values));
}

double inner_product(const GridFunction& f, const GridFunction& g) {
    if (!same_grid(*f.grid(), *g.grid()))
        throw std::invalid_argument("inner_product: grid mismatch");
    if (f.dim() != g.dim())
        throw std::invalid_argument("inner_product: dimension mismatch");
    const Eigen::VectorXd& w = f.grid()->weights();
    double acc = 0.0;
    for (int i = 0; i < f.size(); ++i)
        acc += w[i] * f.values().row(i).dot(g.values().row(i));
    return acc;
}

} // namespace ocie
