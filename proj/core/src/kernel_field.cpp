#include "ocie/kernel_field.hpp"

#include <stdexcept>

namespace ocie {

MatrixKernelField::MatrixKernelField(GridPtr grid, KernelArity arity, int rows, int cols)
    : grid_(std::move(grid)), arity_(arity), rows_(rows), cols_(cols) {
    if (rows < 1 || cols < 1)
        throw std::invalid_argument("kernel block shape must be positive");
    const int n = grid_->size();
    if (arity_ == KernelArity::One)
        data_ = Eigen::MatrixXd::Zero(static_cast<long>(n) * rows, cols);
    else
        data_ = Eigen::MatrixXd::Zero(static_cast<long>(n) * rows,
                                      static_cast<long>(n) * cols);
}

MatrixKernelField
MatrixKernelField::sample_one(GridPtr grid, int rows, int cols,
                              const std::function<Eigen::MatrixXd(double)>& fn) {
    MatrixKernelField k(std::move(grid), KernelArity::One, rows, cols);
    for (int i = 0; i < k.grid_->size(); ++i) {
        Eigen::MatrixXd blk = fn(k.grid_->node(i));
        if (blk.rows() != rows || blk.cols() != cols)
            throw std::invalid_argument("kernel sampler returned a wrong-shaped block");
        k.block(i) = blk;
    }
    return k;
}

MatrixKernelField
MatrixKernelField::sample_two(GridPtr grid, int rows, int cols,
                              const std::function<Eigen::MatrixXd(double, double)>& fn) {
    MatrixKernelField k(std::move(grid), KernelArity::Two, rows, cols);
    for (int i = 0; i < k.grid_->size(); ++i)
        for (int j = 0; j < k.grid_->size(); ++j) {
            Eigen::MatrixXd blk = fn(k.grid_->node(i), k.grid_->node(j));
            if (blk.rows() != rows || blk.cols() != cols)
                throw std::invalid_argument("kernel sampler returned a wrong-shaped block");
            k.block(i, j) = blk;
        }
    return k;
}

MatrixKernelField MatrixKernelField::zero(GridPtr grid, KernelArity arity, int rows,
                                          int cols) {
    return MatrixKernelField(std::move(grid), arity, rows, cols);
}

Eigen::Block<const Eigen::MatrixXd> MatrixKernelField::block(int i) const {
    return data_.block(static_cast<long>(i) * rows_, 0, rows_, cols_);
}

Eigen::Block<Eigen::MatrixXd> MatrixKernelField::block(int i) {
    return data_.block(static_cast<long>(i) * rows_, 0, rows_, cols_);
}

Eigen::Block<const Eigen::MatrixXd> MatrixKernelField::block(int i, int j) const {
    return data_.block(static_cast<long>(i) * rows_, static_cast<long>(j) * cols_,
                       rows_, cols_);
}

Eigen::Block<Eigen::MatrixXd> MatrixKernelField::block(int i, int j) {
    return data_.block(static_cast<long>(i) * rows_, static_cast<long>(j) * cols_,
                       rows_, cols_);
}

GridFunction apply_kernel(const MatrixKernelField& K, const GridFunction& f) {
    if (K.arity() != KernelArity::Two)
        throw std::invalid_argument("apply_kernel needs a two-argument kernel");
    if (!same_grid(*K.grid(), *f.grid()))
        throw std::invalid_argument("apply_kernel: grid mismatch");
    if (K.cols() != f.dim())
        throw std::invalid_argument("apply_kernel: kernel cols must equal function dim");

    const int n = f.size();
    const Eigen::VectorXd& w = K.grid()->weights();
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, K.rows());
    for (int i = 0; i < n; ++i) {
        Eigen::VectorXd acc = Eigen::VectorXd::Zero(K.rows());
        for (int j = 0; j < n; ++j)
            acc.noalias() += w[j] * (K.block(i, j) * f.values().row(j).transpose());
        out.row(i) = acc.transpose();
    }
    return GridFunction(f.grid(), std::move(out));
}

} // namespace ocie
