#include "qbl/blmodel.hpp"

#include <cmath>

namespace qbl {

Matrix log_returns(const Matrix& prices) {
    if (prices.rows() < 2) throw InsufficientData("log_returns: need at least 2 rows");
    Matrix r(prices.rows() - 1, prices.cols());
    for (int t = 1; t < prices.rows(); ++t) {
        for (int a = 0; a < prices.cols(); ++a) {
            const double prev = prices(t - 1, a);
            const double cur = prices(t, a);
            if (!(prev > 0.0) || !(cur > 0.0))
                throw NonPositivePrice("log_returns: price <= 0 at row " + std::to_string(t) +
                                       ", column " + std::to_string(a));
            r(t - 1, a) = std::log(cur / prev);
        }
    }
    return r;
}

std::vector<double> column_means(const Matrix& m) {
    std::vector<double> mean(m.cols(), 0.0);
    for (int t = 0; t < m.rows(); ++t)
        for (int a = 0; a < m.cols(); ++a) mean[a] += m(t, a);
    for (double& v : mean) v /= static_cast<double>(m.rows());
    return mean;
}

SymMatrix sample_covariance(const Matrix& returns) {
    const int t_len = returns.rows();
    const int n = returns.cols();
    if (t_len < 2) throw InsufficientData("sample_covariance: need at least 2 rows");
    const std::vector<double> mean = column_means(returns);
    SymMatrix cov(n);
    for (int i = 0; i < n; ++i) {
        for (int j = i; j < n; ++j) {
            double acc = 0.0;
            for (int t = 0; t < t_len; ++t)
                acc += (returns(t, i) - mean[i]) * (returns(t, j) - mean[j]);
            cov.set(i, j, acc / static_cast<double>(t_len - 1));
        }
    }
    return cov;
}

std::vector<double> implied_return(double gamma, const SymMatrix& sigma,
                                   const std::vector<double>& w_mkt) {
    if (static_cast<int>(w_mkt.size()) != sigma.dim())
        throw DimensionMismatch("implied_return: weight length != sigma dim");
    std::vector<double> pi = sigma.mul(w_mkt);
    for (double& v : pi) v *= gamma;
    return pi;
}

double estimate_gamma(const std::vector<double>& index_returns, const std::vector<double>& rf) {
    if (index_returns.size() != rf.size() || index_returns.size() < 2)
        throw DimensionMismatch("estimate_gamma: series must have equal length >= 2");
    const double n = static_cast<double>(index_returns.size());
    double mean_r = 0.0, mean_f = 0.0;
    for (std::size_t i = 0; i < index_returns.size(); ++i) {
        mean_r += index_returns[i];
        mean_f += rf[i];
    }
    mean_r /= n;
    mean_f /= n;
    double var = 0.0;
    for (double r : index_returns) var += (r - mean_r) * (r - mean_r);
    var /= (n - 1.0);
    if (var <= 1e-18) throw ZeroVariance("estimate_gamma: index return variance is zero");
    return (mean_r - mean_f) / var;
}

double effective_gamma(double gamma, int budget) {
    if (budget < 1) throw DimensionMismatch("effective_gamma: budget must be >= 1");
    return gamma / static_cast<double>(budget);
}

std::vector<double> combined_return(const SymMatrix& sigma, const std::vector<double>& pi,
                                    const ViewSet& views) {
    const int n = sigma.dim();
    if (static_cast<int>(pi.size()) != n || static_cast<int>(views.q.size()) != n ||
        static_cast<int>(views.omega.size()) != n)
        throw DimensionMismatch("combined_return: dimension mismatch");
    for (double w : views.omega)
        if (!(w > 0.0)) throw NotPositiveDefinite("combined_return: Omega must be positive");

    const SymMatrix tau_sigma_inv = invert_spd(sigma.scaled(views.tau));
    std::vector<double> omega_inv(n);
    for (int i = 0; i < n; ++i) omega_inv[i] = 1.0 / views.omega[i];

    const SymMatrix posterior_precision = tau_sigma_inv.plus_diagonal(omega_inv);
    std::vector<double> rhs = tau_sigma_inv.mul(pi);
    for (int i = 0; i < n; ++i) rhs[i] += omega_inv[i] * views.q[i];
    return invert_spd(posterior_precision).mul(rhs);
}

std::vector<double> index_series(const Matrix& prices, int snapshot_row,
                                 const std::vector<double>& caps, double base) {
    const int n = prices.cols();
    if (static_cast<int>(caps.size()) != n)
        throw DimensionMismatch("index_series: caps length != asset count");
    if (snapshot_row < 0 || snapshot_row >= prices.rows())
        throw DimensionMismatch("index_series: snapshot row out of range");
    double total = 0.0;
    for (double c : caps) {
        if (c < 0.0) throw AllZeroCaps("index_series: caps must be nonnegative");
        total += c;
    }
    if (!(total > 0.0)) throw AllZeroCaps("index_series: caps are all zero");

    std::vector<double> shares(n);
    for (int i = 0; i < n; ++i) {
        const double price = prices(snapshot_row, i);
        if (!(price > 0.0)) throw NonPositivePrice("index_series: snapshot price <= 0");
        shares[i] = base * (caps[i] / total) / price;
    }
    std::vector<double> index(prices.rows(), 0.0);
    for (int t = 0; t < prices.rows(); ++t) {
        double level = 0.0;
        for (int i = 0; i < n; ++i) level += prices(t, i) * shares[i];
        index[t] = level;
    }
    return index;
}

}  // namespace qbl
