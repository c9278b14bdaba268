#pragma once

#include <Eigen/Dense>
#include <functional>

#include "ocie/grid.hpp"
#include "ocie/grid_function.hpp"

namespace ocie {

enum class KernelArity { One, Two };

/// Matrix-valued kernel sampled pointwise at grid nodes (arity One) or at
/// node pairs (arity Two). Blocks all share the declared rows x cols shape.
/// Storage is one dense matrix of stacked blocks, which is also the layout
/// the Nystrom solvers consume.
class MatrixKernelField {
public:
    MatrixKernelField(GridPtr grid, KernelArity arity, int rows, int cols);

    static MatrixKernelField
    sample_one(GridPtr grid, int rows, int cols,
               const std::function<Eigen::MatrixXd(double)>& fn);
    static MatrixKernelField
    sample_two(GridPtr grid, int rows, int cols,
               const std::function<Eigen::MatrixXd(double, double)>& fn);

    /// Zero kernels of either arity.
    static MatrixKernelField zero(GridPtr grid, KernelArity arity, int rows, int cols);

    const GridPtr& grid() const noexcept { return grid_; }
    KernelArity arity() const noexcept { return arity_; }
    int rows() const noexcept { return rows_; }
    int cols() const noexcept { return cols_; }

    // arity One accessors
    Eigen::Block<const Eigen::MatrixXd> block(int i) const;
    Eigen::Block<Eigen::MatrixXd> block(int i);

    // arity Two accessors
    Eigen::Block<const Eigen::MatrixXd> block(int i, int j) const;
    Eigen::Block<Eigen::MatrixXd> block(int i, int j);

    const Eigen::MatrixXd& data() const noexcept { return data_; }

private:
    GridPtr grid_;
    KernelArity arity_;
    int rows_;
    int cols_;
    Eigen::MatrixXd data_; // (N*rows) x cols  or  (N*rows) x (N*cols)
};

/// Integral operator application: (result)_i = sum_j w_j K(x_i, x_j) f_j.
GridFunction apply_kernel(const MatrixKernelField& K, const GridFunction& f);

} // namespace ocie
