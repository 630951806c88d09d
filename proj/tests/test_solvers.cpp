#include <doctest.h>

#include <cmath>

#include "qbl/qubo.hpp"
#include "qbl/rng.hpp"
#include "qbl/solvers.hpp"

using namespace qbl;

namespace {

QuboProblem random_bl_like(Rng& rng, int n, int budget, double lambda = 1.0) {
    SymMatrix sigma(n);
    Matrix r(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) r(i, j) = rng.uniform(-0.15, 0.15);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            double acc = 0.0;
            for (int k = 0; k < n; ++k) acc += r(k, i) * r(k, j);
            sigma.set(i, j, acc + (i == j ? 0.01 : 0.0));
        }
    std::vector<double> mu(n);
    for (double& v : mu) v = rng.uniform(-0.3, 0.3);
    return build_qubo(sigma, mu, rng.uniform(0.2, 1.0), lambda, budget);
}

}  // namespace

TEST_CASE("heuristic ansatz parameter counts") {
    CHECK(build_heuristic_ansatz(12, 4).param_count() == 180);  // 3N(p+1)
    const Circuit small = build_heuristic_ansatz(2, 1);
    CHECK(small.param_count() == 12);
    int cnots = 0;
    for (const Gate& g : small.gates())
        if (g.kind == GateKind::CNOT) ++cnots;
    CHECK(cnots == 1);
}

TEST_CASE("heuristic ansatz at zero parameters is the identity on |0...0>") {
    const Circuit c = build_heuristic_ansatz(4, 2);
    StateVector s(4);
    apply_circuit_inplace(s, c, std::vector<double>(c.param_count(), 0.0));
    CHECK(std::abs(s[0] - Amplitude(1.0, 0.0)) <= 1e-12);
}

TEST_CASE("qaoa ansatz has 2p parameters") {
    Rng rng(40);
    const QuboProblem q = random_bl_like(rng, 4, 2);
    const IsingModel m = to_ising(q);
    CHECK(build_qaoa_ansatz(m, 8).param_count() == 16);
    CHECK(build_qaoa_ansatz(m, 1).param_count() == 2);
}

TEST_CASE("qaoa on a zero Hamiltonian keeps the uniform distribution") {
    SymMatrix sigma(3);
    QuboProblem q;
    q.n = 3;
    q.quadratic = sigma;
    q.linear = {0.0, 0.0, 0.0};
    q.lambda = 0.0;
    q.budget = 1;
    const IsingModel m = to_ising(q);
    const Circuit c = build_qaoa_ansatz(m, 2);
    Rng rng(41);
    std::vector<double> params(c.param_count());
    for (double& v : params) v = rng.uniform(0.0, 6.28);
    StateVector s(3);
    apply_circuit_inplace(s, c, params);
    for (std::size_t z = 0; z < s.size(); ++z)
        CHECK(s.probability(z) == doctest::Approx(1.0 / 8.0));
}

TEST_CASE("qaoa at zero angles gives the mean energy of a ring") {
    QuboProblem q;
    q.n = 3;
    q.quadratic = SymMatrix(3);
    q.quadratic.set(0, 1, 0.5);
    q.quadratic.set(1, 2, 0.5);
    q.quadratic.set(0, 2, 0.5);
    q.linear = {0.1, -0.2, 0.3};
    q.lambda = 0.0;
    q.budget = 1;
    const IsingModel m = to_ising(q);
    const Circuit c = build_qaoa_ansatz(m, 2);
    StateVector s(3);
    apply_circuit_inplace(s, c, std::vector<double>(c.param_count(), 0.0));
    double mean = 0.0;
    for (double e : m.energy_table.energy) mean += e;
    mean /= 8.0;
    CHECK(expectation_diagonal(s, m.energy_table) == doctest::Approx(mean));
}

TEST_CASE("solve finds the unique feasible ground state of a tiny instance") {
    SymMatrix sigma(2);
    const QuboProblem q = build_qubo(sigma, {1.0, -1.0}, 0.0, 2.0, 1);
    const IsingModel m = to_ising(q);
    SolveConfig cfg;
    cfg.starts = 5;
    cfg.final_shots = 5;
    cfg.seed = 7;
    const SolveResult res = solve(m, {AnsatzSpec::Kind::Heuristic, 2, 2}, cfg);
    const SearchResult exact = exhaustive_search(m, 1);
    CHECK(res.sampled.index == exact.best_state);
    CHECK(res.sampled.energy == doctest::Approx(exact.best_energy));
    CHECK(res.sampled.feasible);
    CHECK(res.sampled.ar == doctest::Approx(1.0));
}

TEST_CASE("solve is bit-identical for a fixed seed, regardless of workers") {
    Rng rng(42);
    const QuboProblem q = random_bl_like(rng, 4, 2);
    const IsingModel m = to_ising(q);
    SolveConfig cfg;
    cfg.starts = 4;
    cfg.final_shots = 5;
    cfg.seed = 123;
    cfg.workers = 1;
    const SolveResult a = solve(m, {AnsatzSpec::Kind::Heuristic, 4, 2}, cfg);
    cfg.workers = 4;
    const SolveResult b = solve(m, {AnsatzSpec::Kind::Heuristic, 4, 2}, cfg);
    CHECK(a.best_start == b.best_start);
    CHECK(a.ansatz_expectation == b.ansatz_expectation);
    CHECK(a.best_params == b.best_params);
    CHECK(a.samples == b.samples);
    CHECK(a.sampled.bitstring == b.sampled.bitstring);
}

TEST_CASE("solve respects the variational bound and min-selection") {
    Rng rng(43);
    for (int trial = 0; trial < 3; ++trial) {
        const QuboProblem q = random_bl_like(rng, 5, 2, 3.0);
        const IsingModel m = to_ising(q);
        SolveConfig cfg;
        cfg.starts = 3;
        cfg.final_shots = 7;
        cfg.seed = 50 + trial;
        const SolveResult res = solve(m, {AnsatzSpec::Kind::Heuristic, 5, 2}, cfg);

        double global_min = m.energy(0);
        for (std::size_t z = 1; z < m.energy_table.energy.size(); ++z)
            global_min = std::min(global_min, m.energy(z));
        CHECK(res.ansatz_expectation >= global_min - 1e-9);

        for (const auto& [bits, count] : res.samples)
            CHECK(res.sampled.energy <= m.energy(bits_to_index(bits)) + 1e-12);
    }
}

TEST_CASE("qaoa solve lands a positive-AR solution on a small instance") {
    Rng rng(44);
    const QuboProblem q = random_bl_like(rng, 4, 2, 1.0);
    const IsingModel m = to_ising(q);
    SolveConfig cfg;
    cfg.starts = 20;
    cfg.final_shots = 10;
    cfg.seed = 9;
    const SolveResult res = solve(m, {AnsatzSpec::Kind::Qaoa, 4, 3}, cfg);
    CHECK(res.sampled.ar > 0.0);
}

TEST_CASE("ansatz_variance: a basis-state circuit has zero variance") {
    SymMatrix sigma(2);
    const QuboProblem q = build_qubo(sigma, {0.4, -0.7}, 1.0, 1.0, 1);
    const IsingModel m = to_ising(q);
    Circuit c(2);
    c.ry(0, 3.141592653589793);  // |10> in qubit order, index 1
    Rng rng(45);
    const VarianceReport rep = ansatz_variance(m, c, {}, 1000, rng);
    CHECK(rep.analytic == doctest::Approx(0.0));
    CHECK(rep.sampled == doctest::Approx(0.0));
}

TEST_CASE("ansatz_variance: uniform two-point distribution {0, 2} has variance 1") {
    // One qubit in |+>, energies 0 and 2.
    QuboProblem q;
    q.n = 1;
    q.quadratic = SymMatrix(1);
    q.linear = {2.0};
    q.lambda = 0.0;
    q.budget = 1;
    const IsingModel m = to_ising(q);
    REQUIRE(m.energy(0) == doctest::Approx(0.0));
    REQUIRE(m.energy(1) == doctest::Approx(2.0));
    Circuit c(1);
    c.h(0);
    Rng rng(46);
    const VarianceReport rep = ansatz_variance(m, c, {}, 500000, rng);
    CHECK(rep.analytic == doctest::Approx(1.0));
    const double se = std::sqrt(2.0 / 499999.0);  // normal-approx SE of s^2
    CHECK(std::abs(rep.sampled - 1.0) <= 5.0 * se);
}

TEST_CASE("sampled variance tracks the analytic value at 500k shots") {
    Rng rng(47);
    const QuboProblem q = random_bl_like(rng, 4, 2);
    const IsingModel m = to_ising(q);
    const Circuit c = build_heuristic_ansatz(4, 2);
    std::vector<double> params(c.param_count());
    for (double& v : params) v = rng.uniform(0.0, 6.28);
    Rng shot_rng(48);
    const VarianceReport rep = ansatz_variance(m, c, params, 500000, shot_rng);

    StateVector s(4);
    apply_circuit_inplace(s, c, params);
    const EnergyMoments mom = energy_moments(s, m.energy_table);
    const double se_var =
        std::sqrt(std::max(0.0, mom.fourth_central - mom.variance * mom.variance) / 500000.0);
    CHECK(std::abs(rep.sampled - rep.analytic) <= 5.0 * std::max(se_var, 1e-12));
}

TEST_CASE("a tightly converged heuristic state concentrates its shots") {
    SymMatrix sigma(3);
    const QuboProblem q = build_qubo(sigma, {0.9, -0.8, 0.3}, 0.0, 2.0, 1);
    const IsingModel m = to_ising(q);
    SolveConfig cfg;
    cfg.starts = 6;
    cfg.final_shots = 5;
    cfg.seed = 11;
    const SolveResult res = solve(m, {AnsatzSpec::Kind::Heuristic, 3, 2}, cfg);
    if (res.analytic_variance < 1e-6) {
        CHECK(res.samples.size() == 1);
        CHECK(res.samples.begin()->second == 5);
    }
    CHECK(res.sampled.ar == doctest::Approx(1.0));
}
