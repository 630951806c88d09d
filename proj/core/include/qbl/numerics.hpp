#pragma once

#include <functional>
#include <span>
#include <vector>

#include "qbl/errors.hpp"

namespace qbl {

/// Dense row-major matrix. Only the handful of operations the pipeline needs.
class Matrix {
  public:
    Matrix() = default;
    Matrix(int rows, int cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows) * cols, fill) {}

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    double& operator()(int i, int j) { return data_[static_cast<std::size_t>(i) * cols_ + j]; }
    double operator()(int i, int j) const { return data_[static_cast<std::size_t>(i) * cols_ + j]; }

    std::vector<double> col(int j) const {
        std::vector<double> out(rows_);
        for (int i = 0; i < rows_; ++i) out[i] = (*this)(i, j);
        return out;
    }
    std::vector<double> row(int i) const {
        std::vector<double> out(cols_);
        for (int j = 0; j < cols_; ++j) out[j] = (*this)(i, j);
        return out;
    }

    std::vector<double> mul(std::span<const double> v) const;

  private:
    int rows_ = 0;
    int cols_ = 0;
    std::vector<double> data_;
};

/// Symmetric matrix with exact entry symmetry: set() writes both triangles,
/// so entries[i][j] == entries[j][i] bit-for-bit.
class SymMatrix {
  public:
    SymMatrix() = default;
    explicit SymMatrix(int dim) : dim_(dim), data_(static_cast<std::size_t>(dim) * dim, 0.0) {
        if (dim < 1) throw DimensionMismatch("SymMatrix dim must be >= 1");
    }

    static SymMatrix identity(int dim);
    static SymMatrix diagonal(std::span<const double> d);

    int dim() const { return dim_; }
    double operator()(int i, int j) const { return data_[static_cast<std::size_t>(i) * dim_ + j]; }
    void set(int i, int j, double v) {
        data_[static_cast<std::size_t>(i) * dim_ + j] = v;
        data_[static_cast<std::size_t>(j) * dim_ + i] = v;
    }

    std::vector<double> mul(std::span<const double> v) const;
    /// x' M x
    double quad_form(std::span<const double> x) const;
    double trace() const;
    SymMatrix scaled(double factor) const;
    SymMatrix plus_diagonal(std::span<const double> d) const;

  private:
    int dim_ = 0;
    std::vector<double> data_;
};

/// Inverse of a symmetric positive-definite matrix via Cholesky
/// factorization. A pivot at or below 1e-12 raises NotPositiveDefinite.
/// The result satisfies max|m * inv - I| <= 1e-9 * dim for well-scaled m.
SymMatrix invert_spd(const SymMatrix& m);

struct EighResult {
    std::vector<double> eigenvalues;  ///< ascending
    Matrix eigenvectors;              ///< orthonormal columns, column k pairs with eigenvalues[k]
};

/// Symmetric eigendecomposition by cyclic Jacobi sweeps. Intended for the
/// small (<= 16x16) matrices this pipeline produces; raises NoConvergence if
/// the off-diagonal mass has not vanished after 100 sweeps.
EighResult eigh(const SymMatrix& m);

struct MinimizeConfig {
    int max_iters = 500;
    double f_tol = 1e-8;    ///< stop when the objective improves by less than this
    double x_tol = 1e-10;   ///< stop when the accepted step is shorter than this
    double fd_step = 1e-6;  ///< central-difference step when no gradient is supplied
    /// Optional analytic gradient. When absent, central differences are used.
    std::function<std::vector<double>(std::span<const double>)> gradient;
};

struct MinimizeResult {
    std::vector<double> x;
    double fx = 0.0;
    int iterations = 0;
    bool converged = false;
};

/// Local minimization with BFGS and a backtracking (Armijo) line search.
/// Deterministic given x0 and cfg; the returned objective never exceeds
/// f(x0). Raises NonFiniteObjective if f or the gradient produces NaN/inf.
MinimizeResult minimize_local(const std::function<double(std::span<const double>)>& f,
                              std::vector<double> x0, const MinimizeConfig& cfg = {});

}  // namespace qbl
