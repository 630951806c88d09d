#pragma once

#include <string>
#include <vector>

#include "qbl/numerics.hpp"

namespace qbl {

/// Weekly close prices, one column per asset, dates strictly ascending.
struct PriceSeries {
    std::vector<std::string> dates;  ///< ISO-8601, ascending
    std::vector<std::string> tickers;
    Matrix prices;  ///< rows = dates, cols = assets, strictly positive
};

/// Investor views in the direct form used here: P is the identity, so each
/// view touches exactly one asset. omega holds the diagonal of Omega.
struct ViewSet {
    std::vector<double> q;      ///< view vector Q
    std::vector<double> omega;  ///< Omega_kk = tau * Sigma_kk, all > 0
    std::vector<double> eta;    ///< signed view strengths in [-2, 2]
    double tau = 0.05;
};

/// Everything a segment solve needs, in weekly log-return units throughout.
struct BlInputs {
    SymMatrix sigma;
    std::vector<double> w_mkt;
    double gamma = 0.0;
    double gamma_eff = 0.0;
    double tau = 0.05;
    int budget = 0;
    double lambda = 0.0;
    std::vector<double> pi;     ///< implied return
    std::vector<double> mu_bl;  ///< combined return
};

/// r_t = ln(p_t / p_{t-1}) per asset; output has one fewer row.
Matrix log_returns(const Matrix& prices);

/// Sample covariance (N-1 denominator) of the return rows.
SymMatrix sample_covariance(const Matrix& returns);

std::vector<double> column_means(const Matrix& m);

/// Pi = gamma * Sigma * w_mkt (reverse optimization).
std::vector<double> implied_return(double gamma, const SymMatrix& sigma,
                                   const std::vector<double>& w_mkt);

/// gamma = (mean(index returns) - mean(risk-free)) / var(index returns).
double estimate_gamma(const std::vector<double>& index_returns, const std::vector<double>& rf);

/// gamma / B: the coefficient to optimize block solutions with, so that the
/// 1/B-renormalized portfolio matches the intended gamma.
double effective_gamma(double gamma, int budget);

/// mu_BL = [(tau Sigma)^-1 + Omega^-1]^-1 [(tau Sigma)^-1 Pi + Omega^-1 Q]
/// (P is the identity here).
std::vector<double> combined_return(const SymMatrix& sigma, const std::vector<double>& pi,
                                    const ViewSet& views);

/// Market-cap-weighted index with shares frozen at `snapshot_row`: `base`
/// money is split by cap weight at the snapshot, giving constant share
/// counts S_i, and index_t = sum_i P_{t,i} S_i.
std::vector<double> index_series(const Matrix& prices, int snapshot_row,
                                 const std::vector<double>& caps, double base = 100.0);

}  // namespace qbl
