#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "qbl/backtest.hpp"
#include "qbl/data.hpp"
#include "qbl/numerics.hpp"

using namespace qbl;

namespace {

std::filesystem::path temp_dir() {
    const auto dir = std::filesystem::temp_directory_path() / "qbl_data_test";
    std::filesystem::create_directories(dir);
    return dir;
}

std::string write_temp(const std::string& name, const std::string& content) {
    const auto path = temp_dir() / name;
    std::ofstream f(path);
    f << content;
    return path.string();
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream f(p);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("load_prices_csv: small valid file") {
    const std::string path = write_temp("p1.csv",
                                        "date,AAA,BBB\n"
                                        "2020-01-10,10.5,20.25\n"
                                        "2020-01-03,10.0,20.0\n");
    const PriceTable t = load_prices_csv(path);
    CHECK(t.dates == std::vector<std::string>{"2020-01-03", "2020-01-10"});  // sorted
    CHECK(t.tickers == std::vector<std::string>{"AAA", "BBB"});
    CHECK(t.prices(0, 0) == doctest::Approx(10.0));
    CHECK(t.prices(1, 1) == doctest::Approx(20.25));
}

TEST_CASE("load_prices_csv: duplicate dates and bad cells are rejected") {
    CHECK_THROWS_AS(load_prices_csv(write_temp("p2.csv",
                                               "date,AAA\n"
                                               "2020-01-03,10\n"
                                               "2020-01-03,11\n")),
                    ParseError);
    CHECK_THROWS_AS(load_prices_csv(write_temp("p3.csv",
                                               "date,AAA\n"
                                               "2020-01-03,abc\n")),
                    ParseError);
    CHECK_THROWS_AS(load_prices_csv(write_temp("p4.csv",
                                               "date,AAA\n"
                                               "03/01/2020,10\n")),
                    ParseError);
    CHECK_THROWS_AS(load_prices_csv(write_temp("p5.csv",
                                               "date,AAA\n"
                                               "2020-01-03,-4\n")),
                    NonPositivePrice);
}

TEST_CASE("load_prices_csv: a 12-ticker universe parses to 12 columns") {
    std::ostringstream file;
    file << "date";
    for (int i = 0; i < 12; ++i) file << ",T" << i;
    file << "\n2020-01-03";
    for (int i = 0; i < 12; ++i) file << ',' << (10 + i);
    file << "\n2020-01-10";
    for (int i = 0; i < 12; ++i) file << ',' << (11 + i);
    file << '\n';
    const PriceTable t = load_prices_csv(write_temp("p6.csv", file.str()));
    CHECK(t.tickers.size() == 12);
    CHECK(t.prices.cols() == 12);
    CHECK(t.prices.rows() == 2);
}

TEST_CASE("load_caps_csv and nearest-at-or-before lookup") {
    const std::string path = write_temp("c1.csv",
                                        "date,ticker,cap\n"
                                        "2020-01-03,AAA,100\n"
                                        "2020-01-03,BBB,300\n"
                                        "2020-04-03,AAA,110\n"
                                        "2020-04-03,BBB,290\n");
    const CapsTable t = load_caps_csv(path);
    const std::vector<std::string> tickers{"AAA", "BBB"};
    CHECK(t.at_or_before("2020-02-01", tickers) == std::vector<double>{100.0, 300.0});
    CHECK(t.at_or_before("2020-04-03", tickers) == std::vector<double>{110.0, 290.0});
    CHECK_THROWS_AS(t.at_or_before("2019-12-31", tickers), InsufficientData);
    CHECK_THROWS_AS(t.at_or_before("2020-02-01", {"AAA", "ZZZ"}), MissingColumn);
}

TEST_CASE("load_indicators_csv forward-fills gaps") {
    const std::string path = write_temp("i1.csv",
                                        "date,X,Y\n"
                                        "2020-01-03,,5\n"
                                        "2020-01-10,2,\n"
                                        "2020-01-17,3,7\n");
    const IndicatorPanel p = load_indicators_csv(path);
    CHECK(p.values(0, 0) == doctest::Approx(2.0));  // back-filled leading gap
    CHECK(p.values(1, 1) == doctest::Approx(5.0));  // forward-filled
}

TEST_CASE("preprocess: zero-variance column is rejected") {
    IndicatorPanel p;
    p.names = {"a", "b", "c", "d"};
    p.dates = {"2020-01-03", "2020-01-10", "2020-01-17", "2020-01-24"};
    p.values = Matrix(4, 4);
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c) p.values(r, c) = c == 1 ? 3.0 : r * (c + 1.0);
    CHECK_THROWS_AS(preprocess(p, 4), DegenerateColumn);
}

TEST_CASE("preprocess: standardization and PCA properties on the training window") {
    Rng rng(80);
    const int rows = 60, cols = 6, train = 40;
    IndicatorPanel p;
    for (int c = 0; c < cols; ++c) p.names.push_back("col" + std::to_string(c));
    p.values = Matrix(rows, cols);
    for (int r = 0; r < rows; ++r) {
        p.dates.push_back("2020-01-03");
        for (int c = 0; c < cols; ++c)
            p.values(r, c) = rng.uniform(-3.0, 3.0) + (c == 2 ? 5.0 * rng.normal() : 0.0);
    }
    const FeatureSet f = preprocess(p, train);
    CHECK(f.features.rows() == rows);
    CHECK(f.features.cols() == 4);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < 4; ++c) {
            CHECK(f.features(r, c) > 0.0);
            CHECK(f.features(r, c) <= 2.0 * 3.14159265358979 + 1e-12);
        }

    // PCA components are uncorrelated over the training window (the affine
    // rescale preserves correlation).
    Matrix train_rows(train, 4);
    for (int r = 0; r < train; ++r)
        for (int c = 0; c < 4; ++c) train_rows(r, c) = f.features(r, c);
    const SymMatrix cov = sample_covariance(train_rows);
    for (int a = 0; a < 4; ++a)
        for (int b = a + 1; b < 4; ++b)
            CHECK(std::abs(cov(a, b)) <=
                  1e-8 * std::sqrt(cov(a, a) * cov(b, b)) + 1e-12);

    // Train-window fit: appending rows must not change transformed training rows.
    IndicatorPanel longer = p;
    longer.values = Matrix(rows + 10, cols);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) longer.values(r, c) = p.values(r, c);
    for (int r = rows; r < rows + 10; ++r) {
        longer.dates.push_back("2021-01-01");
        for (int c = 0; c < cols; ++c) longer.values(r, c) = rng.uniform(-9.0, 9.0);
    }
    const FeatureSet f2 = preprocess(longer, train);
    for (int r = 0; r < train; ++r)
        for (int c = 0; c < 4; ++c) CHECK(f2.features(r, c) == f.features(r, c));
}

TEST_CASE("prune_conflicts: identical points with opposite labels both go") {
    const std::vector<std::vector<double>> pts{{1.0, 1.0}, {1.0, 1.0}, {3.0, 3.0}};
    const std::vector<int> labels{1, -1, 1};
    const auto keep = prune_conflicts(pts, labels, 0.5);
    CHECK(keep == std::vector<char>{0, 0, 1});
}

TEST_CASE("prune_conflicts: uniform labels remove nothing") {
    const std::vector<std::vector<double>> pts{{1.0}, {1.0001}, {1.0002}};
    const std::vector<int> labels{1, 1, 1};
    const auto keep = prune_conflicts(pts, labels, 10.0);
    CHECK(keep == std::vector<char>{1, 1, 1});
}

TEST_CASE("prune_conflicts: post-condition verified by a quadratic scan") {
    Rng rng(81);
    std::vector<std::vector<double>> pts;
    std::vector<int> labels;
    for (int i = 0; i < 60; ++i) {
        pts.push_back({rng.uniform(0.0, 2.0), rng.uniform(0.0, 2.0)});
        labels.push_back(rng.uniform01() < 0.5 ? -1 : 1);
    }
    const double eps = 0.35;
    const auto keep = prune_conflicts(pts, labels, eps);
    for (std::size_t i = 0; i < pts.size(); ++i) {
        if (!keep[i]) continue;
        for (std::size_t j = 0; j < pts.size(); ++j) {
            if (!keep[j] || i == j) continue;
            double d2 = 0.0;
            for (int k = 0; k < 2; ++k) d2 += (pts[i][k] - pts[j][k]) * (pts[i][k] - pts[j][k]);
            if (std::sqrt(d2) < eps) CHECK(labels[i] == labels[j]);
        }
    }
    // A kept point was never part of a conflicting pair.
    for (std::size_t i = 0; i < pts.size(); ++i) {
        if (keep[i]) continue;
        bool had_conflict = false;
        for (std::size_t j = 0; j < pts.size(); ++j) {
            if (i == j || labels[i] == labels[j]) continue;
            double d2 = 0.0;
            for (int k = 0; k < 2; ++k) d2 += (pts[i][k] - pts[j][k]) * (pts[i][k] - pts[j][k]);
            if (std::sqrt(d2) < eps) had_conflict = true;
        }
        CHECK(had_conflict);
    }
}

TEST_CASE("synth_fixture: identical seeds give byte-identical CSVs") {
    const auto dir1 = temp_dir() / "synth_a";
    const auto dir2 = temp_dir() / "synth_b";
    write_synth_csvs(synth_fixture(99, 6, 330), dir1.string());
    write_synth_csvs(synth_fixture(99, 6, 330), dir2.string());
    for (const char* name : {"prices.csv", "caps.csv", "indicators.csv", "riskfree.csv"}) {
        const std::string a = slurp(dir1 / name);
        CHECK(!a.empty());
        CHECK(a == slurp(dir2 / name));
    }
    // and a different seed changes at least the prices
    write_synth_csvs(synth_fixture(100, 6, 330), dir2.string());
    CHECK(slurp(dir1 / "prices.csv") != slurp(dir2 / "prices.csv"));
}

TEST_CASE("synth_fixture: 730 weeks support 9 walk-forward segments") {
    const SynthData data = synth_fixture(1, 12, 730);
    CHECK(data.prices.prices.rows() == 730);
    CHECK(make_segments(data.prices.dates.size()).size() == 9);
    CHECK(data.prices.dates.front() == "2008-01-04");
}

TEST_CASE("synth_fixture: generated covariance is positive semi-definite") {
    const SynthData data = synth_fixture(2, 8, 330);
    const SymMatrix cov = sample_covariance(log_returns(data.prices.prices));
    const EighResult es = eigh(cov);
    CHECK(es.eigenvalues.front() >= -1e-10);
}

TEST_CASE("synth csv files load back through the csv loaders") {
    const auto dir = temp_dir() / "roundtrip";
    const SynthData data = synth_fixture(3, 5, 330);
    write_synth_csvs(data, dir.string());
    const MarketData md = load_market_data((dir / "prices.csv").string(),
                                           (dir / "caps.csv").string(),
                                           (dir / "indicators.csv").string(),
                                           (dir / "riskfree.csv").string());
    CHECK(md.prices.prices.rows() == 330);
    CHECK(md.prices.tickers == data.prices.tickers);
    CHECK(md.indicators.cols() == 10);
    CHECK(md.riskfree.size() == 330);
    CHECK(md.warnings.empty());
}

TEST_CASE("synth_view_dataset is deterministic and in range") {
    const LabeledDataset a = synth_view_dataset(5, 64);
    const LabeledDataset b = synth_view_dataset(5, 64);
    CHECK(a.features == b.features);
    CHECK(a.y1 == b.y1);
    for (const auto& x : a.features)
        for (double v : x) {
            CHECK(v > 0.0);
            CHECK(v <= 2.0 * 3.14159265358979 + 1e-12);
        }
}
