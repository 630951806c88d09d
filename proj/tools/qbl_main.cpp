// qbl: quantum-enhanced Black-Litterman portfolio pipeline.
//
// Subcommands: backtest, solve, views-train, penalty-scan, sample-bound,
// synth-data. Exit codes: 0 success, 1 runtime failure, 2 usage/parse error.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "qbl/backtest.hpp"
#include "qbl/data.hpp"
#include "qbl/qubo.hpp"
#include "qbl/solvers.hpp"
#include "qbl/views.hpp"

namespace {

struct CommonOptions {
    std::uint64_t seed = 0;
    std::string out_dir = "out";
    int workers = 2;
    std::string profile;
};

struct DataOptions {
    std::string prices = "prices.csv";
    std::string caps = "caps.csv";
    std::string indicators = "indicators.csv";
    std::string riskfree = "riskfree.csv";
};

void add_common(CLI::App* cmd, CommonOptions& opt) {
    cmd->add_option("--seed", opt.seed, "Random seed");
    cmd->add_option("--out", opt.out_dir, "Output directory");
    cmd->add_option("--workers", opt.workers, "Worker thread budget");
}

void add_data(CLI::App* cmd, DataOptions& opt) {
    cmd->add_option("--prices", opt.prices, "Prices CSV (date + one column per ticker)");
    cmd->add_option("--caps", opt.caps, "Market caps CSV (date,ticker,cap)");
    cmd->add_option("--indicators", opt.indicators, "Indicator CSV (date + named columns)");
    cmd->add_option("--riskfree", opt.riskfree, "Risk-free CSV (date,rate; annualized percent)");
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::filesystem::create_directories(path.parent_path().empty() ? "." : path.parent_path());
    std::ofstream f(path);
    if (!f) throw qbl::Error("cannot write '" + path.string() + "'");
    f << content;
}

qbl::QuboInstance load_instance(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw qbl::ParseError("cannot open instance '" + path + "'");
    nlohmann::json j;
    try {
        f >> j;
    } catch (const nlohmann::json::exception& e) {
        throw qbl::ParseError(std::string("instance JSON: ") + e.what());
    }
    try {
        return qbl::instance_from_json(j);
    } catch (const nlohmann::json::exception& e) {
        throw qbl::ParseError(std::string("instance JSON: ") + e.what());
    }
}

int cmd_backtest(const CommonOptions& common, const DataOptions& data,
                 qbl::BacktestConfig cfg) {
    if (common.profile == "paper16") {
        cfg.budget = 8;
        cfg.vqe_reps = 6;
        cfg.vqe_starts = 20;
        cfg.qaoa_reps = 10;
        cfg.qaoa_starts = 500;
        cfg.final_shots = 10;
    } else if (common.profile == "paper12") {
        cfg.budget = 6;
        cfg.vqe_reps = 4;
        cfg.vqe_starts = 10;
        cfg.qaoa_reps = 8;
        cfg.qaoa_starts = 500;
        cfg.final_shots = 5;
    } else if (!common.profile.empty()) {
        throw CLI::ValidationError("--profile", "unknown profile '" + common.profile + "'");
    }
    cfg.seed = common.seed;
    cfg.workers = common.workers;

    const qbl::MarketData md =
        qbl::load_market_data(data.prices, data.caps, data.indicators, data.riskfree);
    for (const auto& w : md.warnings) std::cerr << "warning: " << w << '\n';

    const qbl::BacktestReport report = qbl::run_backtest(md, cfg);
    for (const auto& seg : report.segments)
        for (const auto& w : seg.inputs.warnings)
            std::cerr << "warning: segment " << seg.segment_index << ": " << w << '\n';

    const std::filesystem::path out(common.out_dir);
    std::filesystem::create_directories(out);
    write_file(out / "segments.csv", report.segments_csv());
    write_file(out / "summary.json", report.summary_json().dump(2) + "\n");
    write_file(out / "growth.svg", report.growth_svg());

    std::cout << "segments: " << report.segments.size() << '\n';
    const auto mean_cer = report.summary_json()["mean_cer"];
    for (const auto& [name, value] : mean_cer.items())
        std::cout << "mean CER " << name << ": " << value.get<double>() << '\n';
    std::cout << "reports written to " << out.string() << '\n';
    return 0;
}

int cmd_solve(const CommonOptions& common, const std::string& instance_path,
              const std::string& method, int reps, int starts, int shots,
              const std::string& out_file) {
    const qbl::QuboInstance inst = load_instance(instance_path);
    const qbl::QuboProblem problem = qbl::build_qubo(inst);
    const qbl::IsingModel ising = qbl::to_ising(problem);

    nlohmann::json out;
    out["n"] = inst.sigma.dim();
    out["budget"] = inst.budget;
    if (ising.n <= 20) {
        const qbl::SearchResult exact = qbl::exhaustive_search(ising, inst.budget);
        out["exact"] = {{"bitstring", qbl::index_to_bits(exact.best_state, ising.n)},
                        {"energy", exact.best_energy},
                        {"worst_energy", exact.worst_energy},
                        {"feasible_count", exact.feasible_count}};
    }

    if (method == "exact") {
        const qbl::SearchResult exact = qbl::exhaustive_search(ising, inst.budget);
        out["method"] = "exact";
        out["solution"] = {{"bitstring", qbl::index_to_bits(exact.best_state, ising.n)},
                           {"energy", exact.best_energy},
                           {"feasible", true},
                           {"ar", 1.0}};
    } else {
        qbl::AnsatzSpec spec;
        spec.kind = method == "qaoa" ? qbl::AnsatzSpec::Kind::Qaoa
                                     : qbl::AnsatzSpec::Kind::Heuristic;
        spec.n_qubits = ising.n;
        spec.reps = reps;
        qbl::SolveConfig cfg;
        cfg.starts = starts;
        cfg.final_shots = shots;
        cfg.seed = common.seed;
        cfg.workers = common.workers;
        const qbl::SolveResult res = qbl::solve(ising, spec, cfg);
        out["method"] = method;
        out["result"] = qbl::solve_result_to_json(res);
        out["solution"] = {{"bitstring", res.sampled.bitstring},
                           {"energy", res.sampled.energy},
                           {"feasible", res.sampled.feasible},
                           {"ar", res.sampled.ar}};
    }
    const std::string text = out.dump(2) + "\n";
    std::cout << text;
    if (!out_file.empty()) write_file(out_file, text);
    return 0;
}

int cmd_views_train(const CommonOptions& common, const DataOptions& data, int train_weeks,
                    const std::string& kernel_kind, double rbf_gamma, int label_horizon) {
    const qbl::MarketData md =
        qbl::load_market_data(data.prices, data.caps, data.indicators, data.riskfree);
    const int n_weeks = static_cast<int>(md.prices.dates.size());
    if (train_weeks > n_weeks)
        throw qbl::InsufficientData("views-train: only " + std::to_string(n_weeks) +
                                    " weeks available");

    qbl::BacktestConfig cfg;
    cfg.label_horizon = label_horizon;
    cfg.workers = common.workers;
    qbl::Segment seg{0, train_weeks, train_weeks, train_weeks};
    // Reuse the segment machinery for the training-window view pipeline; the
    // test window is empty, so only the classifier part of the inputs is
    // meaningful here.
    qbl::IndicatorPanel panel;
    panel.names = md.indicator_names;
    panel.dates.assign(md.prices.dates.begin(), md.prices.dates.begin() + train_weeks);
    panel.values = qbl::Matrix(train_weeks, md.indicators.cols());
    for (int r = 0; r < train_weeks; ++r)
        for (int c = 0; c < md.indicators.cols(); ++c) panel.values(r, c) = md.indicators(r, c);
    const qbl::FeatureSet features = qbl::preprocess(panel, train_weeks);

    nlohmann::json out;
    out["kernel"] = kernel_kind;
    nlohmann::json assets = nlohmann::json::object();
    for (int a = 0; a < md.prices.prices.cols(); ++a) {
        qbl::Matrix window(train_weeks, 1);
        for (int r = 0; r < train_weeks; ++r) window(r, 0) = md.prices.prices(r, a);
        const qbl::Matrix returns = qbl::log_returns(window);
        const qbl::LabelSeries labels = qbl::label_series(returns.col(0), label_horizon);

        qbl::LabeledDataset d;
        const int labeled = static_cast<int>(labels.y1.size());
        for (int j = 0; j < labeled; ++j) {
            d.features.push_back(features.features.row(j + 1));
            d.y1.push_back(labels.y1[j]);
            d.y2.push_back(labels.y2[j]);
        }
        const int split = std::max(1, (labeled * 4) / 5);
        for (int j = 0; j < split; ++j) d.train_idx.push_back(j);
        for (int j = split; j < labeled; ++j) d.test_idx.push_back(j);

        qbl::KernelSpec kernel;
        if (kernel_kind == "rbf")
            kernel = qbl::RbfKernel{rbf_gamma};
        else
            kernel = qbl::QuantumKernel{cfg.feature_map};

        nlohmann::json asset;
        try {
            const auto m1 = qbl::train_kernel_svm(d, qbl::ViewTarget::Y1, kernel);
            asset["y1"] = m1.to_json();
        } catch (const qbl::SingleClassTraining&) {
            asset["y1"] = {{"kind", "constant"}, {"note", "single-class training window"}};
        }
        try {
            const auto m2 = qbl::train_kernel_svm(d, qbl::ViewTarget::Y2, kernel);
            asset["y2"] = m2.to_json();
        } catch (const qbl::SingleClassTraining&) {
            asset["y2"] = {{"kind", "constant"}, {"note", "single-class training window"}};
        }
        assets[md.prices.tickers[a]] = std::move(asset);
    }
    out["assets"] = std::move(assets);

    const std::filesystem::path out_path =
        std::filesystem::path(common.out_dir) / "views.json";
    write_file(out_path, out.dump(2) + "\n");
    std::cout << "view models written to " << out_path.string() << '\n';
    return 0;
}

int cmd_penalty_scan(const std::string& instance_path, std::vector<double> lambdas) {
    if (lambdas.empty()) throw CLI::ValidationError("--lambdas", "at least one value required");
    const qbl::QuboInstance base = load_instance(instance_path);
    std::cout << "lambda,lowest_infeasible,fraction_feasible_below,ok\n";
    for (double lambda : lambdas) {
        qbl::QuboInstance inst = base;
        inst.lambda = lambda;
        const qbl::PenaltyReport rep = qbl::penalty_report(qbl::build_qubo(inst));
        std::cout << lambda << ',' << rep.lowest_infeasible << ',' << rep.fraction_feasible_below
                  << ',' << (rep.ok ? "true" : "false") << '\n';
    }
    return 0;
}

int cmd_sample_bound(double p_g, double g) {
    if (!(p_g > 0.0) || !(p_g < 1.0)) {
        std::cerr << "parse error: --pg must lie strictly between 0 and 1\n";
        return 2;
    }
    const std::int64_t k_max = qbl::max_justified_shots(p_g);
    std::cout << "P_g = " << p_g << " (AR >= " << g << ")\n";
    std::cout << "max justified final samplings K = " << k_max << "\n";
    std::cout << "K,prob_reach\n";
    for (std::int64_t k : {std::int64_t(1), std::int64_t(5), k_max})
        std::cout << k << ',' << qbl::prob_reach(p_g, k) << '\n';
    return 0;
}

int cmd_synth_data(const CommonOptions& common, int n_assets, int n_weeks) {
    const qbl::SynthData data = qbl::synth_fixture(common.seed, n_assets, n_weeks);
    qbl::write_synth_csvs(data, common.out_dir);
    std::cout << "synthetic market data written to " << common.out_dir << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"quantum-enhanced Black-Litterman portfolio pipeline"};
    app.require_subcommand(1);
    app.set_config("--config", "", "Key=value config file; flags override file values");
    app.allow_config_extras(CLI::config_extras_mode::error);

    CommonOptions common;
    DataOptions data;
    qbl::BacktestConfig bt;

    auto* backtest = app.add_subcommand("backtest", "Walk-forward backtest of all strategies");
    add_common(backtest, common);
    add_data(backtest, data);
    backtest->add_option("--profile", common.profile, "Preset: paper12 or paper16");
    backtest->add_option("--train-len", bt.train_len, "Training window length in weeks");
    backtest->add_option("--test-len", bt.test_len, "Test window length in weeks");
    backtest->add_option("--step", bt.step, "Walk-forward step in weeks");
    backtest->add_option("--budget", bt.budget, "Number of assets to hold (B)");
    backtest->add_option("--lambda", bt.lambda, "Constraint penalty");
    backtest->add_option("--tau", bt.tau, "View uncertainty scale");
    backtest->add_option("--label-horizon", bt.label_horizon, "Label look-ahead t in weeks");
    backtest->add_option("--vqe-p", bt.vqe_reps, "Heuristic ansatz repetitions");
    backtest->add_option("--vqe-starts", bt.vqe_starts, "Heuristic VQE initial guesses");
    backtest->add_option("--qaoa-p", bt.qaoa_reps, "QAOA repetitions");
    backtest->add_option("--qaoa-starts", bt.qaoa_starts, "QAOA initial guesses");
    backtest->add_option("--shots", bt.final_shots, "Final measurement shots");

    std::string instance_path, method = "vqe", solve_out;
    int solve_reps = 4, solve_starts = 10, solve_shots = 5;
    auto* solve = app.add_subcommand("solve", "Solve one QUBO instance file");
    add_common(solve, common);
    solve->add_option("--instance", instance_path, "Instance JSON path")->required();
    solve->add_option("--method", method, "vqe, qaoa or exact")
        ->check(CLI::IsMember({"vqe", "qaoa", "exact"}));
    solve->add_option("--p", solve_reps, "Ansatz repetitions");
    solve->add_option("--starts", solve_starts, "Initial guesses");
    solve->add_option("--shots", solve_shots, "Final measurement shots");
    solve->add_option("--out-file", solve_out, "Also write the result JSON here");

    int train_weeks = 260, views_horizon = 52;
    std::string kernel_kind = "quantum";
    double rbf_gamma = 1.0;
    auto* views = app.add_subcommand("views-train", "Train the per-asset view classifiers");
    add_common(views, common);
    add_data(views, data);
    views->add_option("--train-weeks", train_weeks, "Training window (first N weeks)");
    views->add_option("--kernel", kernel_kind, "quantum or rbf")
        ->check(CLI::IsMember({"quantum", "rbf"}));
    views->add_option("--rbf-gamma", rbf_gamma, "RBF kernel gamma");
    views->add_option("--label-horizon", views_horizon, "Label look-ahead t in weeks");

    std::vector<double> lambdas;
    std::string scan_instance;
    auto* penalty = app.add_subcommand("penalty-scan", "Penalty band report over a lambda grid");
    penalty->add_option("--instance", scan_instance, "Instance JSON path")->required();
    penalty->add_option("--lambdas", lambdas, "Lambda grid values")->delimiter(',');

    double pg = 0.0, g_level = 0.95;
    auto* bound = app.add_subcommand("sample-bound", "Justified final-sampling bound");
    bound->add_option("--pg", pg, "Probability of one random sample reaching AR >= g")
        ->required();
    bound->add_option("--g", g_level, "AR level (informational)");

    int synth_assets = 12, synth_weeks = 730;
    auto* synth = app.add_subcommand("synth-data", "Generate a synthetic market fixture");
    add_common(synth, common);
    synth->add_option("--assets", synth_assets, "Number of assets");
    synth->add_option("--weeks", synth_weeks, "Number of weeks (>= 320)");

    try {
        app.parse(argc, argv);
        if (backtest->parsed()) return cmd_backtest(common, data, bt);
        if (solve->parsed())
            return cmd_solve(common, instance_path, method, solve_reps, solve_starts,
                             solve_shots, solve_out);
        if (views->parsed())
            return cmd_views_train(common, data, train_weeks, kernel_kind, rbf_gamma,
                                   views_horizon);
        if (penalty->parsed()) return cmd_penalty_scan(scan_instance, lambdas);
        if (bound->parsed()) return cmd_sample_bound(pg, g_level);
        if (synth->parsed()) return cmd_synth_data(common, synth_assets, synth_weeks);
        std::cerr << "error: no subcommand\n";
        return 2;
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    } catch (const qbl::ParseError& e) {
        std::cerr << "parse error: " << e.what() << '\n';
        return 2;
    } catch (const qbl::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
