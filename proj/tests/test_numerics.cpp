#include <doctest.h>

#include <cmath>

#include "qbl/numerics.hpp"
#include "qbl/rng.hpp"

using namespace qbl;

namespace {

SymMatrix random_spd(Rng& rng, int n, double jitter = 0.1) {
    Matrix r(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) r(i, j) = rng.uniform(-1.0, 1.0);
    SymMatrix m(n);
    for (int i = 0; i < n; ++i) {
        for (int j = i; j < n; ++j) {
            double acc = 0.0;
            for (int k = 0; k < n; ++k) acc += r(k, i) * r(k, j);
            m.set(i, j, acc + (i == j ? jitter : 0.0));
        }
    }
    return m;
}

double identity_residual(const SymMatrix& m, const SymMatrix& inv) {
    const int n = m.dim();
    double worst = 0.0;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            double acc = 0.0;
            for (int k = 0; k < n; ++k) acc += m(i, k) * inv(k, j);
            worst = std::max(worst, std::abs(acc - (i == j ? 1.0 : 0.0)));
        }
    }
    return worst;
}

}  // namespace

TEST_CASE("invert_spd: identity stays identity") {
    const SymMatrix inv = invert_spd(SymMatrix::identity(3));
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) CHECK(inv(i, j) == doctest::Approx(i == j ? 1.0 : 0.0));
}

TEST_CASE("invert_spd: diagonal inverts entrywise") {
    const std::vector<double> d{2.0, 4.0};
    const SymMatrix inv = invert_spd(SymMatrix::diagonal(d));
    CHECK(inv(0, 0) == doctest::Approx(0.5));
    CHECK(inv(1, 1) == doctest::Approx(0.25));
    CHECK(inv(0, 1) == doctest::Approx(0.0));
}

TEST_CASE("invert_spd: residual bound on random SPD matrices") {
    Rng rng(41);
    for (int n : {2, 5, 12, 16}) {
        const SymMatrix m = random_spd(rng, n);
        const SymMatrix inv = invert_spd(m);
        CHECK(identity_residual(m, inv) <= 1e-9 * n);
    }
}

TEST_CASE("invert_spd: involution up to 1e-7 relative") {
    Rng rng(42);
    const SymMatrix m = random_spd(rng, 8);
    const SymMatrix back = invert_spd(invert_spd(m));
    double scale = 0.0;
    for (int i = 0; i < 8; ++i)
        for (int j = 0; j < 8; ++j) scale = std::max(scale, std::abs(m(i, j)));
    for (int i = 0; i < 8; ++i)
        for (int j = 0; j < 8; ++j)
            CHECK(std::abs(back(i, j) - m(i, j)) <= 1e-7 * scale);
}

TEST_CASE("invert_spd: rejects non-positive-definite input") {
    SymMatrix m(2);
    m.set(0, 0, 1.0);
    m.set(1, 1, -1.0);
    CHECK_THROWS_AS(invert_spd(m), NotPositiveDefinite);

    SymMatrix singular(2);
    singular.set(0, 0, 1.0);
    singular.set(0, 1, 1.0);
    singular.set(1, 1, 1.0);  // rank 1
    CHECK_THROWS_AS(invert_spd(singular), NotPositiveDefinite);
}

TEST_CASE("eigh: identity has unit eigenvalues") {
    const EighResult r = eigh(SymMatrix::identity(4));
    for (double v : r.eigenvalues) CHECK(v == doctest::Approx(1.0));
}

TEST_CASE("eigh: 2x2 with known spectrum {1, 3}") {
    SymMatrix m(2);
    m.set(0, 0, 2.0);
    m.set(1, 1, 2.0);
    m.set(0, 1, 1.0);
    const EighResult r = eigh(m);
    CHECK(r.eigenvalues[0] == doctest::Approx(1.0));
    CHECK(r.eigenvalues[1] == doctest::Approx(3.0));
}

TEST_CASE("eigh: reconstruction and orthonormality on random symmetric matrices") {
    Rng rng(7);
    for (int n : {3, 8, 16}) {
        SymMatrix m(n);
        double scale = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = i; j < n; ++j) {
                const double v = rng.uniform(-2.0, 2.0);
                m.set(i, j, v);
                scale = std::max(scale, std::abs(v));
            }
        const EighResult r = eigh(m);

        // ascending
        for (int k = 1; k < n; ++k) CHECK(r.eigenvalues[k] >= r.eigenvalues[k - 1]);

        // V Lambda V' == m
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                double acc = 0.0;
                for (int k = 0; k < n; ++k)
                    acc += r.eigenvectors(i, k) * r.eigenvalues[k] * r.eigenvectors(j, k);
                CHECK(std::abs(acc - m(i, j)) <= 1e-8 * std::max(1.0, scale));
            }
        }
        // V'V == I
        for (int a = 0; a < n; ++a) {
            for (int b = 0; b < n; ++b) {
                double acc = 0.0;
                for (int k = 0; k < n; ++k) acc += r.eigenvectors(k, a) * r.eigenvectors(k, b);
                CHECK(std::abs(acc - (a == b ? 1.0 : 0.0)) <= 1e-9);
            }
        }
        // eigenvalue sum == trace
        double sum = 0.0;
        for (double v : r.eigenvalues) sum += v;
        CHECK(std::abs(sum - m.trace()) <= 1e-9 * n * std::max(1.0, scale));
    }
}

TEST_CASE("minimize_local: convex quadratic reaches the origin") {
    const auto f = [](std::span<const double> x) {
        double acc = 0.0;
        for (double v : x) acc += v * v;
        return acc;
    };
    const MinimizeResult r = minimize_local(f, {1.0, 1.0});
    CHECK(r.fx <= 1e-10);
    CHECK(std::abs(r.x[0]) <= 1e-4);
    CHECK(std::abs(r.x[1]) <= 1e-4);
}

TEST_CASE("minimize_local: shifted parabola") {
    const auto f = [](std::span<const double> x) { return (x[0] - 3.0) * (x[0] - 3.0); };
    const MinimizeResult r = minimize_local(f, {0.0});
    CHECK(r.x[0] == doctest::Approx(3.0).epsilon(1e-3));
}

TEST_CASE("minimize_local: Rosenbrock from the classic start") {
    const auto f = [](std::span<const double> x) {
        const double a = 1.0 - x[0];
        const double b = x[1] - x[0] * x[0];
        return a * a + 100.0 * b * b;
    };
    const MinimizeResult r = minimize_local(f, {-1.2, 1.0});
    CHECK(r.fx <= 1e-6);
}

TEST_CASE("minimize_local: analytic gradient path matches") {
    const auto f = [](std::span<const double> x) {
        return (x[0] - 2.0) * (x[0] - 2.0) + 3.0 * x[1] * x[1];
    };
    MinimizeConfig cfg;
    cfg.gradient = [](std::span<const double> x) {
        return std::vector<double>{2.0 * (x[0] - 2.0), 6.0 * x[1]};
    };
    const MinimizeResult r = minimize_local(f, {5.0, -4.0}, cfg);
    CHECK(r.x[0] == doctest::Approx(2.0).epsilon(1e-4));
    CHECK(std::abs(r.x[1]) <= 1e-4);
}

TEST_CASE("minimize_local: non-finite objective is rejected") {
    const auto f = [](std::span<const double> x) {
        return x[0] > 0.5 ? std::numeric_limits<double>::quiet_NaN() : -x[0];
    };
    CHECK_THROWS_AS(minimize_local(f, {0.0}), NonFiniteObjective);
}

TEST_CASE("minimize_local: never above the starting value, deterministic") {
    Rng rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 1 + static_cast<int>(rng.below(6));
        const SymMatrix a = random_spd(rng, n, 0.5);
        std::vector<double> b(n);
        for (double& v : b) v = rng.uniform(-1.0, 1.0);
        const auto f = [&](std::span<const double> x) {
            std::vector<double> xv(x.begin(), x.end());
            double acc = 0.5 * a.quad_form(xv);
            for (int i = 0; i < n; ++i) acc += b[i] * x[i];
            return acc;
        };
        std::vector<double> x0(n);
        for (double& v : x0) v = rng.uniform(-3.0, 3.0);
        const double f0 = f(x0);
        const MinimizeResult r1 = minimize_local(f, x0);
        const MinimizeResult r2 = minimize_local(f, x0);
        CHECK(r1.fx <= f0);
        CHECK(r1.fx == r2.fx);
        CHECK(r1.x == r2.x);
    }
}
