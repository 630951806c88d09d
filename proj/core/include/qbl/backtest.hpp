#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "qbl/data.hpp"
#include "qbl/qubo.hpp"
#include "qbl/solvers.hpp"
#include "qbl/views.hpp"

namespace qbl {

/// Half-open week-index windows; the test window starts the week after the
/// training window ends.
struct Segment {
    int train_begin = 0;
    int train_end = 0;  ///< == test_begin
    int test_begin = 0;
    int test_end = 0;
};

/// Maximal list of non-overlapping test windows over `n_weeks` of data.
std::vector<Segment> make_segments(std::size_t n_weeks, int train_len = 260, int test_len = 52,
                                   int step = 52);

enum class StrategyKind { BlVqe, BlQaoa, BlExact, MptExact, Naive, Index };
const char* strategy_name(StrategyKind k);

struct StrategyResult {
    StrategyKind strategy = StrategyKind::Naive;
    std::vector<double> weights;       ///< nonnegative, sum to 1
    std::vector<double> test_returns;  ///< weekly log returns over the test window
    double total_log_return = 0.0;
    double cer = 0.0;
    std::optional<double> ar;       ///< solver strategies only
    bool repaired = false;          ///< sampled solution had to be pushed to the budget
};

/// Per-asset classifier outcome used to assemble eta.
struct AssetView {
    int y1 = 1;
    int y2 = 1;
    double s1 = 0.0;
    double s2 = 0.0;
    double eta = 0.0;
    bool fallback_y1 = false;  ///< single-class training data, constant predictor used
    bool fallback_y2 = false;
};

/// Everything derived from the training window only.
struct SegmentInputs {
    Segment seg;
    SymMatrix sigma;
    std::vector<double> mu_hist;
    std::vector<double> w_mkt;
    double gamma = 0.0;
    double gamma_eff = 0.0;
    std::vector<double> pi;
    std::vector<double> mu_bl;
    std::vector<AssetView> views;
    QuboProblem bl_qubo;
    QuboProblem mpt_qubo;
    std::vector<std::string> warnings;
};

struct BacktestConfig {
    int train_len = 260;
    int test_len = 52;
    int step = 52;
    int budget = 6;
    double lambda = 1.0;
    double tau = 0.05;
    int label_horizon = 52;   ///< t in the label rule
    int gamma_window = 520;   ///< weeks of index history for the gamma estimate
    double min_gamma = 0.05;  ///< clamp floor; a warning records any clamping
    double svm_c = 1.0;
    FeatureMapSpec feature_map{};  ///< simple embedding, reps 0 by default
    int vqe_reps = 4;
    int vqe_starts = 10;
    int qaoa_reps = 4;
    int qaoa_starts = 50;
    int final_shots = 5;
    std::uint64_t seed = 0;
    int workers = 1;
};

struct SegmentReport {
    int segment_index = 0;
    SegmentInputs inputs;
    std::vector<StrategyResult> results;
    double vqe_expectation_ar = 0.0;
    double qaoa_expectation_ar = 0.0;
    double vqe_analytic_variance = 0.0;
    double qaoa_analytic_variance = 0.0;
};

SegmentInputs build_segment_inputs(const MarketData& md, const Segment& seg,
                                   const BacktestConfig& cfg);

SegmentReport run_segment(const MarketData& md, const Segment& seg, int segment_index,
                          const BacktestConfig& cfg);

/// CER = mean - (gamma/2) * var of weekly log returns (sample variance).
double cer(const std::vector<double>& test_returns, double gamma);

/// Cumulative product of per-segment gross returns per strategy, base 1.0;
/// element k is the capital after segment k.
std::vector<double> chain_growth(const std::vector<double>& segment_log_returns);

struct BacktestReport {
    std::vector<SegmentReport> segments;
    std::vector<std::string> dates;  ///< full weekly grid (for plotting)
    BacktestConfig config;

    nlohmann::json summary_json() const;
    std::string segments_csv() const;
    std::string growth_svg() const;
};

BacktestReport run_backtest(const MarketData& md, const BacktestConfig& cfg);

/// Buy-and-hold weekly log returns of a fixed-weight portfolio: shares are
/// set at `base_row` and held through [first_row, last_row).
std::vector<double> portfolio_log_returns(const Matrix& prices, const std::vector<double>& weights,
                                          int base_row, int first_row, int last_row);

}  // namespace qbl
