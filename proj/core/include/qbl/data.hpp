#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qbl/blmodel.hpp"
#include "qbl/numerics.hpp"
#include "qbl/views.hpp"

namespace qbl {

using PriceTable = PriceSeries;

/// Market-cap observations in long form (date, ticker, cap), sorted by date.
struct CapsTable {
    struct Row {
        std::string date;
        std::string ticker;
        double cap = 0.0;
    };
    std::vector<Row> rows;

    /// Cap per ticker at the latest observation date <= `date`.
    std::vector<double> at_or_before(const std::string& date,
                                     const std::vector<std::string>& tickers) const;
};

/// Weekly indicator panel; columns are the named feature sources.
struct IndicatorPanel {
    std::vector<std::string> dates;
    std::vector<std::string> names;
    Matrix values;
};

struct RiskFreeSeries {
    std::vector<std::string> dates;
    std::vector<double> values;  ///< annualized percent, converted downstream
};

PriceTable load_prices_csv(const std::string& path);
CapsTable load_caps_csv(const std::string& path);
IndicatorPanel load_indicators_csv(const std::string& path);
RiskFreeSeries load_riskfree_csv(const std::string& path);

/// Prices, caps, indicators and the risk-free series, plus any alignment
/// warnings produced while resampling everything onto the price date grid.
struct MarketData {
    PriceTable prices;
    CapsTable caps;
    Matrix indicators;       ///< aligned to prices.dates
    std::vector<std::string> indicator_names;
    std::vector<double> riskfree;  ///< aligned to prices.dates, annualized percent
    std::vector<std::string> warnings;
};

MarketData load_market_data(const std::string& prices_path, const std::string& caps_path,
                            const std::string& indicators_path,
                            const std::string& riskfree_path);

/// Four-step indicator preprocessing fit on the first `train_len` rows only:
/// 3-week backward moving average (partial windows at the start keep row
/// alignment), per-column standardization, PCA to 4 components
/// (variance-ordered), then an affine rescale of training values onto
/// (0, 2pi]; later rows go through the frozen maps and clamp into the
/// interval. Appending future rows never changes transformed training rows.
struct FeatureSet {
    Matrix features;  ///< rows match the panel, 4 columns, values in (0, 2pi]
    std::vector<std::string> dates;
    int train_len = 0;
};
FeatureSet preprocess(const IndicatorPanel& panel, int train_len, int n_components = 4);

/// Marks for removal both members of any pair closer than eps with different
/// labels; returns the keep mask.
std::vector<char> prune_conflicts(const std::vector<std::vector<double>>& features,
                                  const std::vector<int>& labels, double eps);

/// 0.1 x mean nearest-neighbour distance, the default conflict radius.
double default_prune_epsilon(const std::vector<std::vector<double>>& features);

/// Deterministic synthetic market: geometric random walks whose drift
/// switches with a persistent two-state regime, indicator columns that leak
/// the regime, quarterly cap observations and a smooth risk-free series.
struct SynthData {
    PriceTable prices;
    CapsTable caps;
    IndicatorPanel indicators;
    RiskFreeSeries riskfree;
};
SynthData synth_fixture(std::uint64_t seed, int n_assets, int n_weeks);

/// Writes prices.csv / caps.csv / indicators.csv / riskfree.csv under dir.
/// Identical seeds produce byte-identical files.
void write_synth_csvs(const SynthData& data, const std::string& dir);

MarketData to_market_data(const SynthData& data);

/// Cluster-separable labeled dataset in (0, 2pi]^4 for classifier checks:
/// y1 and y2 split along orthogonal directions, 3:1 train/test split.
LabeledDataset synth_view_dataset(std::uint64_t seed, int n_points);

}  // namespace qbl
