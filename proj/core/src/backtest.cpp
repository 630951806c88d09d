#include "qbl/backtest.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <sstream>

#include "qbl/parallel.hpp"

namespace qbl {

std::vector<Segment> make_segments(std::size_t n_weeks, int train_len, int test_len, int step) {
    if (train_len < 2 || test_len < 1 || step < 1)
        throw InsufficientData("make_segments: window lengths must be positive");
    std::vector<Segment> segments;
    for (int begin = 0;; begin += step) {
        const int train_end = begin + train_len;
        const int test_end = train_end + test_len;
        if (static_cast<std::size_t>(test_end) > n_weeks) break;
        segments.push_back({begin, train_end, train_end, test_end});
    }
    if (segments.empty())
        throw InsufficientData("make_segments: " + std::to_string(n_weeks) +
                               " weeks cannot fit one " + std::to_string(train_len) + "+" +
                               std::to_string(test_len) + " window");
    return segments;
}

const char* strategy_name(StrategyKind k) {
    switch (k) {
        case StrategyKind::BlVqe: return "bl_vqe";
        case StrategyKind::BlQaoa: return "bl_qaoa";
        case StrategyKind::BlExact: return "bl_exact";
        case StrategyKind::MptExact: return "mpt_exact";
        case StrategyKind::Naive: return "naive";
        case StrategyKind::Index: return "index";
    }
    return "?";
}

double cer(const std::vector<double>& test_returns, double gamma) {
    if (test_returns.size() < 2) throw InsufficientData("cer: need at least 2 returns");
    const double n = static_cast<double>(test_returns.size());
    double mean = 0.0;
    for (double r : test_returns) mean += r;
    mean /= n;
    double var = 0.0;
    for (double r : test_returns) var += (r - mean) * (r - mean);
    var /= (n - 1.0);
    return mean - 0.5 * gamma * var;
}

std::vector<double> chain_growth(const std::vector<double>& segment_log_returns) {
    std::vector<double> capital(segment_log_returns.size());
    double log_level = 0.0;
    for (std::size_t k = 0; k < segment_log_returns.size(); ++k) {
        log_level += segment_log_returns[k];
        capital[k] = std::exp(log_level);
    }
    return capital;
}

std::vector<double> portfolio_log_returns(const Matrix& prices, const std::vector<double>& weights,
                                          int base_row, int first_row, int last_row) {
    const int n = prices.cols();
    if (static_cast<int>(weights.size()) != n)
        throw DimensionMismatch("portfolio_log_returns: weights length != asset count");
    auto value_at = [&](int row) {
        double v = 0.0;
        for (int i = 0; i < n; ++i) v += weights[i] * prices(row, i) / prices(base_row, i);
        return v;
    };
    std::vector<double> returns;
    returns.reserve(last_row - first_row);
    double prev = value_at(first_row - 1);
    for (int row = first_row; row < last_row; ++row) {
        const double cur = value_at(row);
        returns.push_back(std::log(cur / prev));
        prev = cur;
    }
    return returns;
}

namespace {

Matrix slice_rows(const Matrix& m, int begin, int end) {
    Matrix out(end - begin, m.cols());
    for (int r = begin; r < end; ++r)
        for (int c = 0; c < m.cols(); ++c) out(r - begin, c) = m(r, c);
    return out;
}

struct TargetLabels {
    std::vector<int> labels;  ///< raw labels (Y1: +-1, Y2: 1/2)
};

/// Constant predictor used when a training split holds a single class.
struct FallbackView {
    int prediction = 1;
    double accuracy = 0.0;
};

FallbackView constant_view(const std::vector<int>& train_labels,
                           const std::vector<int>& test_labels) {
    FallbackView f;
    f.prediction = train_labels.front();
    if (!test_labels.empty()) {
        int correct = 0;
        for (int y : test_labels)
            if (y == f.prediction) ++correct;
        f.accuracy = static_cast<double>(correct) / static_cast<double>(test_labels.size());
    }
    return f;
}

struct ViewOutcome {
    int prediction = 1;
    double accuracy = 0.0;
    bool fallback = false;
};

ViewOutcome classify_view(const std::vector<std::vector<double>>& points,
                          const std::vector<int>& labels, ViewTarget target,
                          const std::vector<double>& predict_point, const BacktestConfig& cfg) {
    const int n_points = static_cast<int>(points.size());
    const int split = std::max(1, (n_points * 4) / 5);  // chronological 80/20

    LabeledDataset d;
    d.features = points;
    d.y1.assign(n_points, 1);
    d.y2.assign(n_points, 1);
    for (int i = 0; i < n_points; ++i)
        (target == ViewTarget::Y1 ? d.y1[i] : d.y2[i]) = labels[i];
    for (int i = 0; i < split; ++i) d.train_idx.push_back(i);
    for (int i = split; i < n_points; ++i) d.test_idx.push_back(i);

    // Conflict pruning on the training split only.
    std::vector<std::vector<double>> train_points;
    std::vector<int> train_labels;
    for (int i : d.train_idx) {
        train_points.push_back(points[i]);
        train_labels.push_back(labels[i]);
    }
    const double eps = default_prune_epsilon(train_points);
    if (eps > 0.0) {
        const auto keep = prune_conflicts(train_points, train_labels, eps);
        std::vector<int> kept;
        for (int i = 0; i < split; ++i)
            if (keep[i]) kept.push_back(i);
        if (!kept.empty()) d.train_idx = std::move(kept);
    }

    ViewOutcome out;
    std::vector<int> kept_train_labels, test_labels;
    for (int i : d.train_idx) kept_train_labels.push_back(labels[i]);
    for (int i : d.test_idx) test_labels.push_back(labels[i]);
    const bool single_class =
        std::all_of(kept_train_labels.begin(), kept_train_labels.end(),
                    [&](int y) { return y == kept_train_labels.front(); });
    if (single_class) {
        const FallbackView f = constant_view(kept_train_labels, test_labels);
        out.prediction = f.prediction;
        out.accuracy = f.accuracy;
        out.fallback = true;
        return out;
    }

    SvmConfig svm;
    svm.c = cfg.svm_c;
    const KernelSpec kernel = QuantumKernel{cfg.feature_map};
    const TrainedClassifier model = train_kernel_svm(d, target, kernel, svm);
    out.prediction = model.predict(predict_point);
    out.accuracy = model.test_accuracy;
    return out;
}

std::vector<double> weekly_rf(const MarketData& md, int begin, int end) {
    std::vector<double> rf;
    rf.reserve(end - begin);
    for (int t = begin; t < end; ++t) rf.push_back(md.riskfree[t] / 100.0 / 52.0);
    return rf;
}

}  // namespace

SegmentInputs build_segment_inputs(const MarketData& md, const Segment& seg,
                                   const BacktestConfig& cfg) {
    const int n_assets = md.prices.prices.cols();
    SegmentInputs in;
    in.seg = seg;

    const Matrix train_prices = slice_rows(md.prices.prices, seg.train_begin, seg.train_end);
    const Matrix train_returns = log_returns(train_prices);
    in.sigma = sample_covariance(train_returns);
    in.mu_hist = column_means(train_returns);

    // Market-cap weights at the snapshot closest to (and not after) the end
    // of the training window.
    const std::string& snapshot_date = md.prices.dates[seg.train_end - 1];
    std::vector<double> caps = md.caps.at_or_before(snapshot_date, md.prices.tickers);
    double cap_total = 0.0;
    for (double c : caps) cap_total += c;
    if (!(cap_total > 0.0)) throw AllZeroCaps("segment: market caps are all zero");
    in.w_mkt.resize(n_assets);
    for (int i = 0; i < n_assets; ++i) in.w_mkt[i] = caps[i] / cap_total;

    // Risk aversion from up to gamma_window weeks of index history before
    // the training end.
    const int hist_begin = std::max(0, seg.train_end - (cfg.gamma_window + 1));
    if (hist_begin > seg.train_end - 3)
        throw InsufficientData("segment: not enough history for gamma");
    const Matrix hist_prices = slice_rows(md.prices.prices, hist_begin, seg.train_end);
    const std::vector<double> index =
        index_series(hist_prices, hist_prices.rows() - 1, caps, 100.0);
    std::vector<double> index_returns(index.size() - 1);
    for (std::size_t t = 1; t < index.size(); ++t)
        index_returns[t - 1] = std::log(index[t] / index[t - 1]);
    if (seg.train_end - hist_begin < cfg.gamma_window + 1)
        in.warnings.push_back("gamma window truncated to " +
                              std::to_string(seg.train_end - hist_begin - 1) + " returns");
    double gamma = estimate_gamma(index_returns, weekly_rf(md, hist_begin + 1, seg.train_end));
    if (gamma < cfg.min_gamma) {
        in.warnings.push_back("estimated gamma " + std::to_string(gamma) + " clamped to " +
                              std::to_string(cfg.min_gamma));
        gamma = cfg.min_gamma;
    }
    in.gamma = gamma;
    in.gamma_eff = effective_gamma(gamma, cfg.budget);
    in.pi = implied_return(gamma, in.sigma, in.w_mkt);

    // Views: features from the training window only; the prediction point is
    // the last training week.
    IndicatorPanel window_panel;
    window_panel.names = md.indicator_names;
    window_panel.values = slice_rows(md.indicators, seg.train_begin, seg.train_end);
    window_panel.dates.assign(md.prices.dates.begin() + seg.train_begin,
                              md.prices.dates.begin() + seg.train_end);
    const FeatureSet features = preprocess(window_panel, window_panel.values.rows());

    in.views.resize(n_assets);
    std::vector<double> eta(n_assets, 0.0);
    parallel_for(n_assets, cfg.workers, [&](std::size_t a) {
        const std::vector<double> asset_returns = train_returns.col(static_cast<int>(a));
        const LabelSeries labels = label_series(asset_returns, cfg.label_horizon);
        const int labeled = static_cast<int>(labels.y1.size());
        // Label j pairs with feature row j + 1 (the week its window starts).
        std::vector<std::vector<double>> points;
        points.reserve(labeled);
        for (int j = 0; j < labeled; ++j) points.push_back(features.features.row(j + 1));
        const std::vector<double> predict_point =
            features.features.row(features.features.rows() - 1);

        AssetView& view = in.views[a];
        const ViewOutcome v1 = classify_view(points, labels.y1, ViewTarget::Y1, predict_point, cfg);
        const ViewOutcome v2 = classify_view(points, labels.y2, ViewTarget::Y2, predict_point, cfg);
        view.y1 = v1.prediction;
        view.s1 = v1.accuracy;
        view.fallback_y1 = v1.fallback;
        view.y2 = v2.prediction;
        view.s2 = v2.accuracy;
        view.fallback_y2 = v2.fallback;
        view.eta = build_eta(view.y1, view.y2, view.s1, view.s2);
        eta[a] = view.eta;
    });

    const ViewSet views = build_views(eta, in.pi, in.sigma, cfg.tau);
    in.mu_bl = combined_return(in.sigma, in.pi, views);

    in.bl_qubo = build_qubo(in.sigma, in.mu_bl, in.gamma_eff, cfg.lambda, cfg.budget);
    in.mpt_qubo = build_qubo(in.sigma, in.mu_hist, in.gamma_eff, cfg.lambda, cfg.budget);
    return in;
}

namespace {

/// Deterministically pushes a bitstring to the budget by greedy single-bit
/// moves that keep the energy as low as possible.
std::size_t repair_to_budget(const IsingModel& m, std::size_t z, int budget) {
    while (std::popcount(z) != budget) {
        const bool add = std::popcount(z) < budget;
        int best_bit = -1;
        double best_energy = 0.0;
        for (int b = 0; b < m.n; ++b) {
            const bool is_set = (z >> b) & 1;
            if (add == is_set) continue;
            const std::size_t candidate = z ^ (std::size_t(1) << b);
            const double e = m.energy(candidate);
            if (best_bit < 0 || e < best_energy) {
                best_bit = b;
                best_energy = e;
            }
        }
        z ^= std::size_t(1) << best_bit;
    }
    return z;
}

std::vector<double> bits_to_weights(std::size_t z, int n) {
    const int ones = std::popcount(z);
    std::vector<double> w(n, 0.0);
    for (int i = 0; i < n; ++i)
        if ((z >> i) & 1) w[i] = 1.0 / static_cast<double>(ones);
    return w;
}

}  // namespace

SegmentReport run_segment(const MarketData& md, const Segment& seg, int segment_index,
                          const BacktestConfig& cfg) {
    SegmentReport report;
    report.segment_index = segment_index;
    report.inputs = build_segment_inputs(md, seg, cfg);
    const SegmentInputs& in = report.inputs;
    const int n_assets = md.prices.prices.cols();

    const IsingModel bl = to_ising(in.bl_qubo);
    const IsingModel mpt = to_ising(in.mpt_qubo);
    const SearchResult bl_exact = exhaustive_search(bl, cfg.budget);
    const SearchResult mpt_exact = exhaustive_search(mpt, cfg.budget);

    const Rng seeds(cfg.seed);
    SolveConfig vqe_cfg;
    vqe_cfg.starts = cfg.vqe_starts;
    vqe_cfg.final_shots = cfg.final_shots;
    vqe_cfg.seed = seeds.derive(2 * segment_index).seed();
    vqe_cfg.workers = cfg.workers;
    const SolveResult vqe = solve(bl, {AnsatzSpec::Kind::Heuristic, bl.n, cfg.vqe_reps}, vqe_cfg);

    SolveConfig qaoa_cfg = vqe_cfg;
    qaoa_cfg.starts = cfg.qaoa_starts;
    qaoa_cfg.seed = seeds.derive(2 * segment_index + 1).seed();
    const SolveResult qaoa = solve(bl, {AnsatzSpec::Kind::Qaoa, bl.n, cfg.qaoa_reps}, qaoa_cfg);

    report.vqe_expectation_ar = vqe.ansatz_ar;
    report.qaoa_expectation_ar = qaoa.ansatz_ar;
    report.vqe_analytic_variance = vqe.analytic_variance;
    report.qaoa_analytic_variance = qaoa.analytic_variance;

    auto evaluate = [&](StrategyKind kind, std::vector<double> weights,
                        std::optional<double> ar, bool repaired) {
        StrategyResult r;
        r.strategy = kind;
        r.weights = std::move(weights);
        r.ar = ar;
        r.repaired = repaired;
        if (kind == StrategyKind::Index) {
            const Matrix window =
                slice_rows(md.prices.prices, seg.train_end - 1, seg.test_end);
            std::vector<double> caps(n_assets);
            for (int i = 0; i < n_assets; ++i) caps[i] = in.w_mkt[i];
            const std::vector<double> index = index_series(window, 0, caps, 100.0);
            r.test_returns.resize(index.size() - 1);
            for (std::size_t t = 1; t < index.size(); ++t)
                r.test_returns[t - 1] = std::log(index[t] / index[t - 1]);
        } else {
            r.test_returns = portfolio_log_returns(md.prices.prices, r.weights,
                                                   seg.train_end - 1, seg.test_begin, seg.test_end);
        }
        for (double ret : r.test_returns) r.total_log_return += ret;
        r.cer = cer(r.test_returns, in.gamma);
        report.results.push_back(std::move(r));
    };

    auto sampled_weights = [&](const SolveResult& res, const IsingModel& m, bool& repaired) {
        std::size_t z = res.sampled.index;
        repaired = false;
        if (std::popcount(z) != cfg.budget) {
            z = repair_to_budget(m, z, cfg.budget);
            repaired = true;
        }
        return bits_to_weights(z, n_assets);
    };

    bool vqe_repaired = false, qaoa_repaired = false;
    const std::vector<double> vqe_w = sampled_weights(vqe, bl, vqe_repaired);
    const std::vector<double> qaoa_w = sampled_weights(qaoa, bl, qaoa_repaired);

    evaluate(StrategyKind::BlVqe, vqe_w, vqe.sampled.ar, vqe_repaired);
    evaluate(StrategyKind::BlQaoa, qaoa_w, qaoa.sampled.ar, qaoa_repaired);
    evaluate(StrategyKind::BlExact, bits_to_weights(bl_exact.best_state, n_assets), 1.0, false);
    evaluate(StrategyKind::MptExact, bits_to_weights(mpt_exact.best_state, n_assets), 1.0, false);
    evaluate(StrategyKind::Naive,
             std::vector<double>(n_assets, 1.0 / static_cast<double>(n_assets)), std::nullopt,
             false);
    evaluate(StrategyKind::Index, in.w_mkt, std::nullopt, false);
    return report;
}

BacktestReport run_backtest(const MarketData& md, const BacktestConfig& cfg) {
    BacktestReport report;
    report.config = cfg;
    report.dates = md.prices.dates;
    const std::vector<Segment> segments =
        make_segments(md.prices.dates.size(), cfg.train_len, cfg.test_len, cfg.step);
    for (std::size_t k = 0; k < segments.size(); ++k)
        report.segments.push_back(run_segment(md, segments[k], static_cast<int>(k), cfg));
    return report;
}

namespace {

constexpr StrategyKind kAllStrategies[] = {StrategyKind::BlVqe,  StrategyKind::BlQaoa,
                                           StrategyKind::BlExact, StrategyKind::MptExact,
                                           StrategyKind::Naive,   StrategyKind::Index};

const StrategyResult& result_for(const SegmentReport& seg, StrategyKind kind) {
    for (const auto& r : seg.results)
        if (r.strategy == kind) return r;
    throw Error("missing strategy result");
}

}  // namespace

nlohmann::json BacktestReport::summary_json() const {
    nlohmann::json j;
    j["config"] = {{"train_len", config.train_len},
                   {"test_len", config.test_len},
                   {"step", config.step},
                   {"budget", config.budget},
                   {"lambda", config.lambda},
                   {"tau", config.tau},
                   {"label_horizon", config.label_horizon},
                   {"vqe_reps", config.vqe_reps},
                   {"vqe_starts", config.vqe_starts},
                   {"qaoa_reps", config.qaoa_reps},
                   {"qaoa_starts", config.qaoa_starts},
                   {"final_shots", config.final_shots},
                   {"seed", config.seed}};
    nlohmann::json segs = nlohmann::json::array();
    for (const auto& seg : segments) {
        nlohmann::json s;
        s["segment"] = seg.segment_index;
        s["train"] = {seg.inputs.seg.train_begin, seg.inputs.seg.train_end};
        s["test"] = {seg.inputs.seg.test_begin, seg.inputs.seg.test_end};
        s["gamma"] = seg.inputs.gamma;
        s["gamma_eff"] = seg.inputs.gamma_eff;
        s["vqe_expectation_ar"] = seg.vqe_expectation_ar;
        s["qaoa_expectation_ar"] = seg.qaoa_expectation_ar;
        s["warnings"] = seg.inputs.warnings;
        nlohmann::json views = nlohmann::json::array();
        for (const auto& v : seg.inputs.views)
            views.push_back({{"y1", v.y1},
                             {"y2", v.y2},
                             {"s1", v.s1},
                             {"s2", v.s2},
                             {"eta", v.eta}});
        s["views"] = views;
        nlohmann::json strategies = nlohmann::json::object();
        for (const auto& r : seg.results) {
            nlohmann::json sr;
            sr["weights"] = r.weights;
            sr["cer"] = r.cer;
            sr["total_log_return"] = r.total_log_return;
            sr["test_returns"] = r.test_returns;
            if (r.ar) sr["ar"] = *r.ar;
            if (r.repaired) sr["repaired"] = true;
            strategies[strategy_name(r.strategy)] = std::move(sr);
        }
        s["strategies"] = std::move(strategies);
        segs.push_back(std::move(s));
    }
    j["segments"] = std::move(segs);

    nlohmann::json chain = nlohmann::json::object();
    nlohmann::json mean_cer = nlohmann::json::object();
    for (StrategyKind kind : kAllStrategies) {
        std::vector<double> seg_returns;
        double cer_acc = 0.0;
        for (const auto& seg : segments) {
            const StrategyResult& r = result_for(seg, kind);
            seg_returns.push_back(r.total_log_return);
            cer_acc += r.cer;
        }
        chain[strategy_name(kind)] = chain_growth(seg_returns);
        mean_cer[strategy_name(kind)] = cer_acc / static_cast<double>(segments.size());
    }
    j["chain"] = std::move(chain);
    j["mean_cer"] = std::move(mean_cer);
    return j;
}

std::string BacktestReport::segments_csv() const {
    std::ostringstream out;
    out << "segment,strategy,cer,ar,total_log_return,weights\n";
    char buf[64];
    const auto fmt = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.10g", v);
        return std::string(buf);
    };
    for (const auto& seg : segments) {
        for (const auto& r : seg.results) {
            out << seg.segment_index << ',' << strategy_name(r.strategy) << ',' << fmt(r.cer)
                << ',' << (r.ar ? fmt(*r.ar) : std::string()) << ',' << fmt(r.total_log_return)
                << ',';
            for (std::size_t i = 0; i < r.weights.size(); ++i) {
                if (i) out << ';';
                out << fmt(r.weights[i]);
            }
            out << '\n';
        }
    }
    return out.str();
}

std::string BacktestReport::growth_svg() const {
    // Weekly capital curves, one polyline per strategy.
    static const char* kColors[] = {"#d62728", "#ff7f0e", "#2ca02c",
                                    "#1f77b4", "#9467bd", "#7f7f7f"};
    std::vector<std::vector<double>> curves;
    std::vector<std::string> names;
    double lo = 1.0, hi = 1.0;
    std::size_t longest = 0;
    for (StrategyKind kind : kAllStrategies) {
        std::vector<double> capital{1.0};
        for (const auto& seg : segments)
            for (double r : result_for(seg, kind).test_returns)
                capital.push_back(capital.back() * std::exp(r));
        lo = std::min(lo, *std::min_element(capital.begin(), capital.end()));
        hi = std::max(hi, *std::max_element(capital.begin(), capital.end()));
        longest = std::max(longest, capital.size());
        curves.push_back(std::move(capital));
        names.push_back(strategy_name(kind));
    }
    if (hi <= lo) hi = lo + 1.0;

    const double width = 900.0, height = 420.0, ml = 60.0, mr = 150.0, mt = 20.0, mb = 40.0;
    const double plot_w = width - ml - mr, plot_h = height - mt - mb;
    std::ostringstream svg;
    svg << "<svg xmlns='http://www.w3.org/2000/svg' width='" << width << "' height='" << height
        << "' viewBox='0 0 " << width << " " << height << "'>\n";
    svg << "<rect width='100%' height='100%' fill='white'/>\n";
    svg << "<line x1='" << ml << "' y1='" << mt + plot_h << "' x2='" << ml + plot_w << "' y2='"
        << mt + plot_h << "' stroke='black'/>\n";
    svg << "<line x1='" << ml << "' y1='" << mt << "' x2='" << ml << "' y2='" << mt + plot_h
        << "' stroke='black'/>\n";
    char buf[64];
    for (int tick = 0; tick <= 4; ++tick) {
        const double v = lo + (hi - lo) * tick / 4.0;
        const double y = mt + plot_h - plot_h * (v - lo) / (hi - lo);
        std::snprintf(buf, sizeof buf, "%.2f", v);
        svg << "<text x='" << ml - 8 << "' y='" << y + 4
            << "' text-anchor='end' font-size='11' font-family='sans-serif'>" << buf
            << "</text>\n";
        svg << "<line x1='" << ml - 4 << "' y1='" << y << "' x2='" << ml << "' y2='" << y
            << "' stroke='black'/>\n";
    }
    svg << "<text x='" << ml + plot_w / 2 << "' y='" << height - 8
        << "' text-anchor='middle' font-size='12' font-family='sans-serif'>week</text>\n";
    for (std::size_t c = 0; c < curves.size(); ++c) {
        svg << "<polyline fill='none' stroke='" << kColors[c] << "' stroke-width='1.5' points='";
        for (std::size_t t = 0; t < curves[c].size(); ++t) {
            const double x = ml + plot_w * (longest > 1
                                                ? static_cast<double>(t) /
                                                      static_cast<double>(longest - 1)
                                                : 0.0);
            const double y = mt + plot_h - plot_h * (curves[c][t] - lo) / (hi - lo);
            std::snprintf(buf, sizeof buf, "%.2f,%.2f ", x, y);
            svg << buf;
        }
        svg << "'/>\n";
        const double ly = mt + 16.0 * (c + 1);
        svg << "<line x1='" << ml + plot_w + 10 << "' y1='" << ly << "' x2='" << ml + plot_w + 30
            << "' y2='" << ly << "' stroke='" << kColors[c] << "' stroke-width='2'/>\n";
        svg << "<text x='" << ml + plot_w + 36 << "' y='" << ly + 4
            << "' font-size='11' font-family='sans-serif'>" << names[c] << "</text>\n";
    }
    svg << "</svg>\n";
    return svg.str();
}

}  // namespace qbl
