#include "qbl/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace qbl {

std::vector<double> Matrix::mul(std::span<const double> v) const {
    if (static_cast<int>(v.size()) != cols_)
        throw DimensionMismatch("Matrix::mul: vector length != cols");
    std::vector<double> out(rows_, 0.0);
    for (int i = 0; i < rows_; ++i) {
        double acc = 0.0;
        for (int j = 0; j < cols_; ++j) acc += (*this)(i, j) * v[j];
        out[i] = acc;
    }
    return out;
}

SymMatrix SymMatrix::identity(int dim) {
    SymMatrix m(dim);
    for (int i = 0; i < dim; ++i) m.set(i, i, 1.0);
    return m;
}

SymMatrix SymMatrix::diagonal(std::span<const double> d) {
    SymMatrix m(static_cast<int>(d.size()));
    for (int i = 0; i < m.dim(); ++i) m.set(i, i, d[i]);
    return m;
}

std::vector<double> SymMatrix::mul(std::span<const double> v) const {
    if (static_cast<int>(v.size()) != dim_)
        throw DimensionMismatch("SymMatrix::mul: vector length != dim");
    std::vector<double> out(dim_, 0.0);
    for (int i = 0; i < dim_; ++i) {
        double acc = 0.0;
        for (int j = 0; j < dim_; ++j) acc += (*this)(i, j) * v[j];
        out[i] = acc;
    }
    return out;
}

double SymMatrix::quad_form(std::span<const double> x) const {
    if (static_cast<int>(x.size()) != dim_)
        throw DimensionMismatch("SymMatrix::quad_form: vector length != dim");
    double acc = 0.0;
    for (int i = 0; i < dim_; ++i) {
        double row = 0.0;
        for (int j = 0; j < dim_; ++j) row += (*this)(i, j) * x[j];
        acc += x[i] * row;
    }
    return acc;
}

double SymMatrix::trace() const {
    double t = 0.0;
    for (int i = 0; i < dim_; ++i) t += (*this)(i, i);
    return t;
}

SymMatrix SymMatrix::scaled(double factor) const {
    SymMatrix out(dim_);
    for (int i = 0; i < dim_; ++i)
        for (int j = i; j < dim_; ++j) out.set(i, j, (*this)(i, j) * factor);
    return out;
}

SymMatrix SymMatrix::plus_diagonal(std::span<const double> d) const {
    if (static_cast<int>(d.size()) != dim_)
        throw DimensionMismatch("SymMatrix::plus_diagonal: vector length != dim");
    SymMatrix out = *this;
    for (int i = 0; i < dim_; ++i) out.set(i, i, (*this)(i, i) + d[i]);
    return out;
}

namespace {

constexpr double kCholeskyPivotFloor = 1e-12;

/// Lower Cholesky factor of m. Throws NotPositiveDefinite on a pivot <= floor.
Matrix cholesky(const SymMatrix& m) {
    const int n = m.dim();
    Matrix l(n, n);
    for (int j = 0; j < n; ++j) {
        double diag = m(j, j);
        for (int k = 0; k < j; ++k) diag -= l(j, k) * l(j, k);
        if (!(diag > kCholeskyPivotFloor))
            throw NotPositiveDefinite("Cholesky pivot " + std::to_string(diag) + " at index " +
                                      std::to_string(j));
        const double ljj = std::sqrt(diag);
        l(j, j) = ljj;
        for (int i = j + 1; i < n; ++i) {
            double acc = m(i, j);
            for (int k = 0; k < j; ++k) acc -= l(i, k) * l(j, k);
            l(i, j) = acc / ljj;
        }
    }
    return l;
}

}  // namespace

SymMatrix invert_spd(const SymMatrix& m) {
    const int n = m.dim();
    const Matrix l = cholesky(m);
    // Solve L L^T X = I column by column, then force exact symmetry.
    Matrix x(n, n);
    std::vector<double> y(n);
    for (int col = 0; col < n; ++col) {
        for (int i = 0; i < n; ++i) {
            double acc = (i == col) ? 1.0 : 0.0;
            for (int k = 0; k < i; ++k) acc -= l(i, k) * y[k];
            y[i] = acc / l(i, i);
        }
        for (int i = n - 1; i >= 0; --i) {
            double acc = y[i];
            for (int k = i + 1; k < n; ++k) acc -= l(k, i) * x(k, col);
            x(i, col) = acc / l(i, i);
        }
    }
    SymMatrix inv(n);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) inv.set(i, j, 0.5 * (x(i, j) + x(j, i)));
    return inv;
}

EighResult eigh(const SymMatrix& m) {
    const int n = m.dim();
    Matrix a(n, n), v(n, n);
    for (int i = 0; i < n; ++i) {
        v(i, i) = 1.0;
        for (int j = 0; j < n; ++j) a(i, j) = m(i, j);
    }

    constexpr int kMaxSweeps = 100;
    int sweep = 0;
    for (; sweep < kMaxSweeps; ++sweep) {
        double off = 0.0;
        for (int p = 0; p < n - 1; ++p)
            for (int q = p + 1; q < n; ++q) off += std::abs(a(p, q));
        if (off == 0.0) break;
        for (int p = 0; p < n - 1; ++p) {
            for (int q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                // Skip rotations that cannot change the result at double precision.
                const double g = 100.0 * std::abs(apq);
                if (sweep > 3 && std::abs(a(p, p)) + g == std::abs(a(p, p)) &&
                    std::abs(a(q, q)) + g == std::abs(a(q, q))) {
                    a(p, q) = a(q, p) = 0.0;
                    continue;
                }
                if (apq == 0.0) continue;
                const double theta = 0.5 * (a(q, q) - a(p, p)) / apq;
                double t = 1.0 / (std::abs(theta) + std::sqrt(1.0 + theta * theta));
                if (theta < 0.0) t = -t;
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;
                const double tau = s / (1.0 + c);
                const double h = t * apq;
                a(p, p) -= h;
                a(q, q) += h;
                a(p, q) = a(q, p) = 0.0;
                auto rotate = [&](Matrix& mat, int i1, int j1, int i2, int j2) {
                    const double g1 = mat(i1, j1);
                    const double g2 = mat(i2, j2);
                    mat(i1, j1) = g1 - s * (g2 + g1 * tau);
                    mat(i2, j2) = g2 + s * (g1 - g2 * tau);
                };
                for (int k = 0; k < p; ++k) { rotate(a, k, p, k, q); a(p, k) = a(k, p); a(q, k) = a(k, q); }
                for (int k = p + 1; k < q; ++k) { rotate(a, p, k, k, q); a(k, p) = a(p, k); a(q, k) = a(k, q); }
                for (int k = q + 1; k < n; ++k) { rotate(a, p, k, q, k); a(k, p) = a(p, k); a(k, q) = a(q, k); }
                for (int k = 0; k < n; ++k) rotate(v, k, p, k, q);
            }
        }
    }
    if (sweep == kMaxSweeps)
        throw NoConvergence("Jacobi eigendecomposition did not converge in " +
                            std::to_string(kMaxSweeps) + " sweeps");

    // Sort ascending and fix the sign convention (largest-|.| entry positive).
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int i, int j) { return a(i, i) < a(j, j); });
    EighResult result;
    result.eigenvalues.resize(n);
    result.eigenvectors = Matrix(n, n);
    for (int k = 0; k < n; ++k) {
        const int src = order[k];
        result.eigenvalues[k] = a(src, src);
        int lead = 0;
        for (int i = 1; i < n; ++i)
            if (std::abs(v(i, src)) > std::abs(v(lead, src))) lead = i;
        const double sign = v(lead, src) < 0.0 ? -1.0 : 1.0;
        for (int i = 0; i < n; ++i) result.eigenvectors(i, k) = sign * v(i, src);
    }
    return result;
}

namespace {

void check_finite(double value, const char* what) {
    if (!std::isfinite(value)) throw NonFiniteObjective(std::string(what) + " is not finite");
}

std::vector<double> central_difference_gradient(
    const std::function<double(std::span<const double>)>& f, std::vector<double>& x, double h) {
    const std::size_t n = x.size();
    std::vector<double> g(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double xi = x[i];
        x[i] = xi + h;
        const double fp = f(x);
        x[i] = xi - h;
        const double fm = f(x);
        x[i] = xi;
        check_finite(fp, "objective");
        check_finite(fm, "objective");
        g[i] = (fp - fm) / (2.0 * h);
    }
    return g;
}

}  // namespace

MinimizeResult minimize_local(const std::function<double(std::span<const double>)>& f,
                              std::vector<double> x0, const MinimizeConfig& cfg) {
    const std::size_t n = x0.size();
    std::vector<double> x = std::move(x0);
    double fx = f(x);
    check_finite(fx, "objective at x0");

    auto grad = [&](std::vector<double>& point) {
        std::vector<double> g =
            cfg.gradient ? cfg.gradient(point) : central_difference_gradient(f, point, cfg.fd_step);
        if (g.size() != n) throw DimensionMismatch("gradient length != parameter count");
        for (double gi : g) check_finite(gi, "gradient");
        return g;
    };

    std::vector<double> g = grad(x);

    // Inverse Hessian approximation, identity to start.
    std::vector<double> h_inv(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) h_inv[i * n + i] = 1.0;

    std::vector<double> direction(n), x_new(n), g_new(n), s(n), y(n), hy(n);
    MinimizeResult result;
    result.x = x;
    result.fx = fx;

    for (int iter = 0; iter < cfg.max_iters; ++iter) {
        result.iterations = iter + 1;
        // d = -H g
        double dir_dot_g = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double acc = 0.0;
            for (std::size_t j = 0; j < n; ++j) acc += h_inv[i * n + j] * g[j];
            direction[i] = -acc;
            dir_dot_g += direction[i] * g[i];
        }
        if (dir_dot_g >= 0.0) {
            // Not a descent direction; reset to steepest descent.
            std::fill(h_inv.begin(), h_inv.end(), 0.0);
            dir_dot_g = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                h_inv[i * n + i] = 1.0;
                direction[i] = -g[i];
                dir_dot_g -= g[i] * g[i];
            }
            if (dir_dot_g == 0.0) { result.converged = true; break; }
        }

        // Backtracking Armijo line search.
        constexpr double kArmijo = 1e-4;
        double step = 1.0;
        double f_new = fx;
        bool accepted = false;
        for (int ls = 0; ls < 48; ++ls) {
            for (std::size_t i = 0; i < n; ++i) x_new[i] = x[i] + step * direction[i];
            f_new = f(x_new);
            check_finite(f_new, "objective");
            if (f_new <= fx + kArmijo * step * dir_dot_g) { accepted = true; break; }
            step *= 0.5;
        }
        if (!accepted) { result.converged = true; break; }

        double step_norm = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            s[i] = x_new[i] - x[i];
            step_norm = std::max(step_norm, std::abs(s[i]));
        }
        const double improvement = fx - f_new;
        x = x_new;
        fx = f_new;
        result.x = x;
        result.fx = fx;

        if (improvement < cfg.f_tol || step_norm < cfg.x_tol) { result.converged = true; break; }
        if (iter == cfg.max_iters - 1) break;

        g_new = grad(x);
        double sy = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            y[i] = g_new[i] - g[i];
            sy += s[i] * y[i];
        }
        g = g_new;
        if (sy > 1e-12) {
            // BFGS inverse update: H <- (I - s y'/sy) H (I - y s'/sy) + s s'/sy
            const double rho = 1.0 / sy;
            double y_hy = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                double acc = 0.0;
                for (std::size_t j = 0; j < n; ++j) acc += h_inv[i * n + j] * y[j];
                hy[i] = acc;
                y_hy += y[i] * acc;
            }
            const double coef = (1.0 + rho * y_hy) * rho;
            for (std::size_t i = 0; i < n; ++i) {
                for (std::size_t j = 0; j < n; ++j) {
                    h_inv[i * n + j] += coef * s[i] * s[j] - rho * (hy[i] * s[j] + s[i] * hy[j]);
                }
            }
        }
    }
    return result;
}

}  // namespace qbl
