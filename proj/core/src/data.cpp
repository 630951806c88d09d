#include "qbl/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include "qbl/rng.hpp"

namespace qbl {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;
constexpr double kFeatureLow = 1e-6;  // lower edge of the (0, 2pi] target interval

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

bool is_iso_date(const std::string& s) {
    if (s.size() != 10 || s[4] != '-' || s[7] != '-') return false;
    for (std::size_t i : {0u, 1u, 2u, 3u, 5u, 6u, 8u, 9u})
        if (s[i] < '0' || s[i] > '9') return false;
    return true;
}

double parse_number(const std::string& cell, int row, int col) {
    if (cell.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::size_t used = 0;
    double v;
    try {
        v = std::stod(cell, &used);
    } catch (const std::exception&) {
        throw ParseError("row " + std::to_string(row) + ", column " + std::to_string(col) +
                         ": '" + cell + "' is not a number");
    }
    while (used < cell.size() && (cell[used] == ' ' || cell[used] == '\r')) ++used;
    if (used != cell.size())
        throw ParseError("row " + std::to_string(row) + ", column " + std::to_string(col) +
                         ": '" + cell + "' is not a number");
    return v;
}

struct RawTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;  ///< first cell is the date
};

RawTable read_dated_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open '" + path + "'");
    RawTable table;
    std::string line;
    int row_no = 0;
    while (std::getline(in, line)) {
        ++row_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto cells = split_line(line);
        if (row_no == 1) {
            table.header = std::move(cells);
            continue;
        }
        if (cells.size() != table.header.size())
            throw ParseError("row " + std::to_string(row_no) + ": expected " +
                             std::to_string(table.header.size()) + " cells, got " +
                             std::to_string(cells.size()));
        if (!is_iso_date(cells[0]))
            throw ParseError("row " + std::to_string(row_no) + ": '" + cells[0] +
                             "' is not an ISO date");
        table.rows.push_back(std::move(cells));
    }
    if (table.header.empty()) throw ParseError("'" + path + "' has no header row");
    std::stable_sort(table.rows.begin(), table.rows.end(),
                     [](const auto& a, const auto& b) { return a[0] < b[0]; });
    for (std::size_t i = 1; i < table.rows.size(); ++i)
        if (table.rows[i][0] == table.rows[i - 1][0])
            throw ParseError("duplicate date '" + table.rows[i][0] + "'");
    return table;
}

}  // namespace

PriceTable load_prices_csv(const std::string& path) {
    const RawTable raw = read_dated_csv(path);
    if (raw.header.size() < 2) throw MissingColumn("prices file needs at least one ticker column");
    PriceTable t;
    t.tickers.assign(raw.header.begin() + 1, raw.header.end());
    t.prices = Matrix(static_cast<int>(raw.rows.size()), static_cast<int>(t.tickers.size()));
    t.dates.reserve(raw.rows.size());
    for (std::size_t r = 0; r < raw.rows.size(); ++r) {
        t.dates.push_back(raw.rows[r][0]);
        for (std::size_t c = 1; c < raw.rows[r].size(); ++c) {
            const double v = parse_number(raw.rows[r][c], static_cast<int>(r + 2),
                                          static_cast<int>(c + 1));
            if (!(v > 0.0))
                throw NonPositivePrice("prices row " + std::to_string(r + 2) + ", ticker " +
                                       t.tickers[c - 1] + ": price must be > 0");
            t.prices(static_cast<int>(r), static_cast<int>(c - 1)) = v;
        }
    }
    return t;
}

CapsTable load_caps_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open '" + path + "'");
    CapsTable t;
    std::string line;
    int row_no = 0;
    while (std::getline(in, line)) {
        ++row_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto cells = split_line(line);
        if (row_no == 1) {
            if (cells.size() != 3 || cells[0] != "date" || cells[1] != "ticker" ||
                cells[2] != "cap")
                throw MissingColumn("caps file must have header 'date,ticker,cap'");
            continue;
        }
        if (cells.size() != 3)
            throw ParseError("caps row " + std::to_string(row_no) + ": expected 3 cells");
        if (!is_iso_date(cells[0]))
            throw ParseError("caps row " + std::to_string(row_no) + ": bad date");
        const double cap = parse_number(cells[2], row_no, 3);
        if (!(cap >= 0.0) || std::isnan(cap))
            throw ParseError("caps row " + std::to_string(row_no) + ": cap must be >= 0");
        t.rows.push_back({cells[0], cells[1], cap});
    }
    std::stable_sort(t.rows.begin(), t.rows.end(), [](const auto& a, const auto& b) {
        return a.date != b.date ? a.date < b.date : a.ticker < b.ticker;
    });
    return t;
}

std::vector<double> CapsTable::at_or_before(const std::string& date,
                                            const std::vector<std::string>& tickers) const {
    std::string best_date;
    for (const Row& r : rows)
        if (r.date <= date && r.date > best_date) best_date = r.date;
    if (best_date.empty())
        throw InsufficientData("no market-cap observation at or before " + date);
    std::vector<double> caps(tickers.size(), -1.0);
    for (const Row& r : rows) {
        if (r.date != best_date) continue;
        const auto it = std::find(tickers.begin(), tickers.end(), r.ticker);
        if (it != tickers.end()) caps[it - tickers.begin()] = r.cap;
    }
    for (std::size_t i = 0; i < caps.size(); ++i)
        if (caps[i] < 0.0)
            throw MissingColumn("no cap for ticker '" + tickers[i] + "' at " + best_date);
    return caps;
}

IndicatorPanel load_indicators_csv(const std::string& path) {
    const RawTable raw = read_dated_csv(path);
    if (raw.header.size() < 2)
        throw MissingColumn("indicators file needs at least one indicator column");
    IndicatorPanel p;
    p.names.assign(raw.header.begin() + 1, raw.header.end());
    p.values = Matrix(static_cast<int>(raw.rows.size()), static_cast<int>(p.names.size()));
    for (std::size_t r = 0; r < raw.rows.size(); ++r) {
        p.dates.push_back(raw.rows[r][0]);
        for (std::size_t c = 1; c < raw.rows[r].size(); ++c)
            p.values(static_cast<int>(r), static_cast<int>(c - 1)) =
                parse_number(raw.rows[r][c], static_cast<int>(r + 2), static_cast<int>(c + 1));
    }
    // Ingestion cleaning: forward-fill interior gaps, back-fill a leading gap.
    for (int c = 0; c < p.values.cols(); ++c) {
        int first_valid = -1;
        for (int r = 0; r < p.values.rows(); ++r)
            if (!std::isnan(p.values(r, c))) { first_valid = r; break; }
        if (first_valid < 0)
            throw DegenerateColumn("indicator '" + p.names[c] + "' has no values");
        for (int r = 0; r < first_valid; ++r) p.values(r, c) = p.values(first_valid, c);
        for (int r = first_valid + 1; r < p.values.rows(); ++r)
            if (std::isnan(p.values(r, c))) p.values(r, c) = p.values(r - 1, c);
    }
    return p;
}

RiskFreeSeries load_riskfree_csv(const std::string& path) {
    const RawTable raw = read_dated_csv(path);
    if (raw.header.size() != 2) throw MissingColumn("riskfree file must have columns date,rate");
    RiskFreeSeries s;
    for (std::size_t r = 0; r < raw.rows.size(); ++r) {
        s.dates.push_back(raw.rows[r][0]);
        const double v = parse_number(raw.rows[r][1], static_cast<int>(r + 2), 2);
        if (std::isnan(v)) throw ParseError("riskfree row " + std::to_string(r + 2) + ": empty");
        s.values.push_back(v);
    }
    return s;
}

namespace {

/// Latest source row with date <= target, per target date; -1 when none.
std::vector<int> align_indices(const std::vector<std::string>& source,
                               const std::vector<std::string>& target) {
    std::vector<int> idx(target.size(), -1);
    std::size_t s = 0;
    for (std::size_t t = 0; t < target.size(); ++t) {
        while (s < source.size() && source[s] <= target[t]) ++s;
        idx[t] = static_cast<int>(s) - 1;
    }
    return idx;
}

}  // namespace

MarketData load_market_data(const std::string& prices_path, const std::string& caps_path,
                            const std::string& indicators_path,
                            const std::string& riskfree_path) {
    MarketData md;
    md.prices = load_prices_csv(prices_path);
    md.caps = load_caps_csv(caps_path);
    const IndicatorPanel panel = load_indicators_csv(indicators_path);
    const RiskFreeSeries rf = load_riskfree_csv(riskfree_path);

    const auto& grid = md.prices.dates;
    md.indicator_names = panel.names;
    md.indicators = Matrix(static_cast<int>(grid.size()), panel.values.cols());
    int filled = 0;
    const auto ind_idx = align_indices(panel.dates, grid);
    for (std::size_t t = 0; t < grid.size(); ++t) {
        if (ind_idx[t] < 0)
            throw InsufficientData("no indicator data at or before " + grid[t]);
        if (panel.dates[ind_idx[t]] != grid[t]) ++filled;
        for (int c = 0; c < panel.values.cols(); ++c)
            md.indicators(static_cast<int>(t), c) = panel.values(ind_idx[t], c);
    }
    if (filled > 0)
        md.warnings.push_back("indicators: " + std::to_string(filled) +
                              " week(s) carried forward onto the price grid");

    const auto rf_idx = align_indices(rf.dates, grid);
    md.riskfree.resize(grid.size());
    filled = 0;
    for (std::size_t t = 0; t < grid.size(); ++t) {
        if (rf_idx[t] < 0) throw InsufficientData("no risk-free data at or before " + grid[t]);
        if (rf.dates[rf_idx[t]] != grid[t]) ++filled;
        md.riskfree[t] = rf.values[rf_idx[t]];
    }
    if (filled > 0)
        md.warnings.push_back("riskfree: " + std::to_string(filled) +
                              " week(s) carried forward onto the price grid");
    return md;
}

FeatureSet preprocess(const IndicatorPanel& panel, int train_len, int n_components) {
    const int rows = panel.values.rows();
    const int cols = panel.values.cols();
    if (rows < 3) throw InsufficientData("preprocess: need at least 3 rows");
    if (cols < n_components)
        throw InsufficientData("preprocess: need at least " + std::to_string(n_components) +
                               " indicator columns");
    if (train_len < 2 || train_len > rows)
        throw InsufficientData("preprocess: train_len out of range");

    // 1. Backward 3-week moving average; partial windows keep row alignment.
    Matrix smoothed(rows, cols);
    for (int r = 0; r < rows; ++r) {
        const int from = std::max(0, r - 2);
        for (int c = 0; c < cols; ++c) {
            double acc = 0.0;
            for (int k = from; k <= r; ++k) acc += panel.values(k, c);
            smoothed(r, c) = acc / static_cast<double>(r - from + 1);
        }
    }

    // 2. Standardize with training-window mean/std.
    std::vector<double> mean(cols, 0.0), sd(cols, 0.0);
    for (int c = 0; c < cols; ++c) {
        for (int r = 0; r < train_len; ++r) mean[c] += smoothed(r, c);
        mean[c] /= static_cast<double>(train_len);
        double var = 0.0;
        for (int r = 0; r < train_len; ++r)
            var += (smoothed(r, c) - mean[c]) * (smoothed(r, c) - mean[c]);
        var /= static_cast<double>(train_len - 1);
        if (var <= 1e-18)
            throw DegenerateColumn("preprocess: indicator '" + panel.names[c] +
                                   "' has zero variance in the training window");
        sd[c] = std::sqrt(var);
    }
    Matrix standardized(rows, cols);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) standardized(r, c) = (smoothed(r, c) - mean[c]) / sd[c];

    // 3. PCA basis from the training window, projected onto all rows.
    SymMatrix cov(cols);
    for (int i = 0; i < cols; ++i) {
        for (int j = i; j < cols; ++j) {
            double acc = 0.0;
            for (int r = 0; r < train_len; ++r) acc += standardized(r, i) * standardized(r, j);
            cov.set(i, j, acc / static_cast<double>(train_len - 1));
        }
    }
    const EighResult es = eigh(cov);
    Matrix scores(rows, n_components);
    for (int k = 0; k < n_components; ++k) {
        const int src = cols - 1 - k;  // descending variance
        for (int r = 0; r < rows; ++r) {
            double acc = 0.0;
            for (int c = 0; c < cols; ++c) acc += standardized(r, c) * es.eigenvectors(c, src);
            scores(r, k) = acc;
        }
    }

    // 4. Affine rescale of training values onto (0, 2pi]; freeze and clamp.
    FeatureSet out;
    out.features = Matrix(rows, n_components);
    out.dates = panel.dates;
    out.train_len = train_len;
    for (int k = 0; k < n_components; ++k) {
        double lo = scores(0, k), hi = scores(0, k);
        for (int r = 1; r < train_len; ++r) {
            lo = std::min(lo, scores(r, k));
            hi = std::max(hi, scores(r, k));
        }
        if (!(hi > lo))
            throw DegenerateColumn("preprocess: component " + std::to_string(k) +
                                   " is constant in the training window");
        const double scale = (kTwoPi - kFeatureLow) / (hi - lo);
        for (int r = 0; r < rows; ++r) {
            const double v = kFeatureLow + (scores(r, k) - lo) * scale;
            out.features(r, k) = std::clamp(v, kFeatureLow, kTwoPi);
        }
    }
    return out;
}

std::vector<char> prune_conflicts(const std::vector<std::vector<double>>& features,
                                  const std::vector<int>& labels, double eps) {
    if (features.size() != labels.size())
        throw DimensionMismatch("prune_conflicts: features/labels size mismatch");
    if (!(eps > 0.0)) throw DimensionMismatch("prune_conflicts: eps must be > 0");
    const std::size_t n = features.size();
    std::vector<char> keep(n, 1);
    const double eps2 = eps * eps;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            if (labels[i] == labels[j]) continue;
            double d2 = 0.0;
            for (std::size_t k = 0; k < features[i].size(); ++k) {
                const double d = features[i][k] - features[j][k];
                d2 += d * d;
            }
            if (d2 < eps2) keep[i] = keep[j] = 0;
        }
    }
    return keep;
}

double default_prune_epsilon(const std::vector<std::vector<double>>& features) {
    const std::size_t n = features.size();
    if (n < 2) return 0.0;
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            double d2 = 0.0;
            for (std::size_t k = 0; k < features[i].size(); ++k) {
                const double d = features[i][k] - features[j][k];
                d2 += d * d;
            }
            best = std::min(best, d2);
        }
        acc += std::sqrt(best);
    }
    return 0.1 * acc / static_cast<double>(n);
}

namespace {

// Days-from-civil calendar conversion (proleptic Gregorian).
long days_from_civil(int y, int m, int d) {
    y -= m <= 2;
    const long era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153u * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<long>(doe) - 719468;
}

void civil_from_days(long z, int& y, int& m, int& d) {
    z += 719468;
    const long era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const long yy = static_cast<long>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
    m = static_cast<int>(mp + (mp < 10 ? 3 : -9));
    y = static_cast<int>(yy + (m <= 2));
}

std::string format_date(long days) {
    int y, m, d;
    civil_from_days(days, y, m, d);
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", y, m, d);
    return buf;
}

std::string format_double(double v, const char* fmt) {
    char buf[64];
    std::snprintf(buf, sizeof buf, fmt, v);
    return buf;
}

}  // namespace

SynthData synth_fixture(std::uint64_t seed, int n_assets, int n_weeks) {
    if (n_assets < 2) throw DimensionMismatch("synth_fixture: need at least 2 assets");
    if (n_weeks < 320) throw DimensionMismatch("synth_fixture: need at least 320 weeks");
    Rng rng(seed);

    const long start = days_from_civil(2008, 1, 4);
    std::vector<std::string> dates(n_weeks);
    for (int t = 0; t < n_weeks; ++t) dates[t] = format_date(start + 7L * t);

    // Per-asset parameters. Volatilities and drift swings are deliberately
    // large so the risk-return part of the segment objectives has the same
    // order of magnitude as a unit penalty, and so the 52-week-mean labels
    // stay learnable from the indicator panel.
    std::vector<double> base_drift(n_assets), regime_gain(n_assets), beta(n_assets),
        idio_vol(n_assets), price0(n_assets), shares_out(n_assets);
    for (int i = 0; i < n_assets; ++i) {
        base_drift[i] = rng.uniform(0.002, 0.008);
        const double direction = (i % 3 == 2) ? -1.0 : 1.0;  // a third counter-cyclical
        regime_gain[i] = direction * rng.uniform(0.080, 0.200);
        beta[i] = rng.uniform(0.5, 1.0);
        idio_vol[i] = rng.uniform(0.30, 0.50);
        price0[i] = rng.uniform(20.0, 200.0);
        shares_out[i] = rng.uniform(1e6, 5e7);
    }

    // Drift cycle of roughly two years per swing: short enough that every
    // training window sees both phases, slow enough that this week's level
    // predicts the mean of the coming year; the bounded integral keeps
    // cumulative drift within a few price decades.
    std::vector<double> regime(n_weeks);
    {
        const double period = rng.uniform(96.0, 120.0);
        const double phase = rng.uniform(0.0, kTwoPi);
        for (int t = 0; t < n_weeks; ++t)
            regime[t] = std::sin(kTwoPi * static_cast<double>(t) / period + phase);
    }

    constexpr double kFactorVol = 0.12;
    std::vector<double> factor(n_weeks);
    for (int t = 0; t < n_weeks; ++t) factor[t] = kFactorVol * rng.normal();

    SynthData out;
    out.prices.dates = dates;
    out.prices.tickers.resize(n_assets);
    for (int i = 0; i < n_assets; ++i) {
        char name[16];
        std::snprintf(name, sizeof name, "A%02d", i);
        out.prices.tickers[i] = name;
    }
    // Returns respond to the drift cycle with a half-horizon delay, so the
    // level visible in this week's indicators sits at the center of the
    // 52-week label window it has to predict.
    constexpr int kDriftLag = 26;
    out.prices.prices = Matrix(n_weeks, n_assets);
    std::vector<double> log_price(n_assets);
    for (int i = 0; i < n_assets; ++i) log_price[i] = std::log(price0[i]);
    for (int t = 0; t < n_weeks; ++t) {
        const double cycle = regime[std::max(0, t - kDriftLag)];
        for (int i = 0; i < n_assets; ++i) {
            if (t > 0) {
                const double r = base_drift[i] + cycle * regime_gain[i] +
                                 beta[i] * factor[t] + idio_vol[i] * rng.normal();
                log_price[i] += r;
            }
            out.prices.prices(t, i) = std::exp(log_price[i]);
        }
    }

    // Quarterly market-cap observations: shares outstanding held constant.
    for (int t = 0; t < n_weeks; t += 13) {
        for (int i = 0; i < n_assets; ++i)
            out.caps.rows.push_back(
                {dates[t], out.prices.tickers[i], shares_out[i] * out.prices.prices(t, i)});
    }

    // Ten indicator columns; the first six carry regime/factor signal, the
    // rest are noise. Scales and offsets are cosmetic (standardization
    // removes them) but keep the files looking like real series.
    const std::vector<std::string> names = {"DOW",    "WILL5000INDFC", "VIXCLS",  "T10Y2Y",
                                            "T10YIE", "DCOILBRENTEU",  "DEXCHUS", "DFF",
                                            "EXPTOTUS", "IGREA"};
    const int n_ind = static_cast<int>(names.size());
    std::vector<double> sig_regime(n_ind), sig_factor(n_ind), noise_amp(n_ind), offset(n_ind),
        scale(n_ind);
    for (int j = 0; j < n_ind; ++j) {
        const bool informative = j < 6;
        const double sgn = (j % 2 == 0) ? 1.0 : -1.0;
        sig_regime[j] = informative ? sgn * rng.uniform(0.9, 1.8) : 0.0;
        sig_factor[j] = rng.uniform(-0.6, 0.6);
        noise_amp[j] = informative ? rng.uniform(0.15, 0.30) : 1.0;
        offset[j] = rng.uniform(1.0, 50.0);
        scale[j] = rng.uniform(0.5, 5.0);
    }
    out.indicators.dates = dates;
    out.indicators.names = names;
    out.indicators.values = Matrix(n_weeks, n_ind);
    for (int t = 0; t < n_weeks; ++t) {
        double factor_ma = 0.0;
        const int from = std::max(0, t - 2);
        for (int k = from; k <= t; ++k) factor_ma += factor[k];
        factor_ma /= static_cast<double>(t - from + 1);
        for (int j = 0; j < n_ind; ++j) {
            const double level = sig_regime[j] * regime[t] + sig_factor[j] * factor_ma +
                                 noise_amp[j] * rng.normal();
            out.indicators.values(t, j) = offset[j] + scale[j] * level;
        }
    }

    // Risk-free series: slow random walk in annualized percent, floored.
    out.riskfree.dates = dates;
    out.riskfree.values.resize(n_weeks);
    double rf = rng.uniform(0.8, 2.5);
    for (int t = 0; t < n_weeks; ++t) {
        rf = std::max(0.01, rf + 0.03 * rng.normal());
        out.riskfree.values[t] = rf;
    }
    return out;
}

void write_synth_csvs(const SynthData& data, const std::string& dir) {
    std::filesystem::create_directories(dir);
    const auto path = [&](const char* name) {
        return (std::filesystem::path(dir) / name).string();
    };
    {
        std::ofstream f(path("prices.csv"));
        f << "date";
        for (const auto& t : data.prices.tickers) f << ',' << t;
        f << '\n';
        for (std::size_t r = 0; r < data.prices.dates.size(); ++r) {
            f << data.prices.dates[r];
            for (int c = 0; c < data.prices.prices.cols(); ++c)
                f << ',' << format_double(data.prices.prices(static_cast<int>(r), c), "%.6f");
            f << '\n';
        }
    }
    {
        std::ofstream f(path("caps.csv"));
        f << "date,ticker,cap\n";
        for (const auto& row : data.caps.rows)
            f << row.date << ',' << row.ticker << ',' << format_double(row.cap, "%.2f") << '\n';
    }
    {
        std::ofstream f(path("indicators.csv"));
        f << "date";
        for (const auto& n : data.indicators.names) f << ',' << n;
        f << '\n';
        for (std::size_t r = 0; r < data.indicators.dates.size(); ++r) {
            f << data.indicators.dates[r];
            for (int c = 0; c < data.indicators.values.cols(); ++c)
                f << ','
                  << format_double(data.indicators.values(static_cast<int>(r), c), "%.6f");
            f << '\n';
        }
    }
    {
        std::ofstream f(path("riskfree.csv"));
        f << "date,rate\n";
        for (std::size_t r = 0; r < data.riskfree.dates.size(); ++r)
            f << data.riskfree.dates[r] << ',' << format_double(data.riskfree.values[r], "%.4f")
              << '\n';
    }
}

MarketData to_market_data(const SynthData& data) {
    MarketData md;
    md.prices = data.prices;
    md.caps = data.caps;
    md.indicator_names = data.indicators.names;
    md.indicators = data.indicators.values;
    md.riskfree = data.riskfree.values;
    return md;
}

LabeledDataset synth_view_dataset(std::uint64_t seed, int n_points) {
    if (n_points < 8) throw DimensionMismatch("synth_view_dataset: need at least 8 points");
    Rng rng(seed);
    constexpr double kPi = 3.141592653589793238462643383279502884;
    const double half = 0.9;   // cluster half-separation along each axis pair
    const double noise = 0.28;

    LabeledDataset d;
    for (int i = 0; i < n_points; ++i) {
        const int side1 = rng.uniform01() < 0.5 ? -1 : 1;
        const int side2 = rng.uniform01() < 0.5 ? -1 : 1;
        std::vector<double> x(4, kPi);
        const double s1 = side1 * half / std::sqrt(2.0);
        const double s2 = side2 * half / std::sqrt(2.0);
        x[0] += s1;
        x[1] += s1;
        x[2] += s2;
        x[3] += s2;
        for (double& v : x) v = std::clamp(v + noise * rng.normal(), kFeatureLow, kTwoPi);
        d.features.push_back(std::move(x));
        d.y1.push_back(side1);
        d.y2.push_back(side2 > 0 ? 2 : 1);
        if (i % 4 == 3)
            d.test_idx.push_back(i);
        else
            d.train_idx.push_back(i);
    }
    return d;
}

}  // namespace qbl
