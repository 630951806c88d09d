#include "qbl/solvers.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>

#include "qbl/parallel.hpp"

namespace qbl {

Circuit build_heuristic_ansatz(int n_qubits, int reps) {
    if (n_qubits < 2) throw DimensionMismatch("heuristic ansatz needs at least 2 qubits");
    if (reps < 1) throw DimensionMismatch("heuristic ansatz needs reps >= 1");
    Circuit c(n_qubits);
    int slot = 0;
    auto rotation_layer = [&] {
        for (int q = 0; q < n_qubits; ++q) {
            c.ry_param(q, slot++);
            c.rz_param(q, slot++);
            c.ry_param(q, slot++);
        }
    };
    for (int block = 0; block < reps; ++block) {
        rotation_layer();
        for (int q = 0; q + 1 < n_qubits; ++q) c.cnot(q, q + 1);
    }
    rotation_layer();
    c.validate();
    return c;
}

Circuit build_qaoa_ansatz(const IsingModel& m, int reps) {
    if (reps < 1) throw DimensionMismatch("qaoa ansatz needs reps >= 1");
    Circuit c(m.n);
    for (int q = 0; q < m.n; ++q) c.h(q);
    for (int layer = 0; layer < reps; ++layer) {
        const int gamma_slot = 2 * layer;
        const int beta_slot = 2 * layer + 1;
        for (int i = 0; i < m.n; ++i) {
            for (int j = i + 1; j < m.n; ++j) {
                const double h_ij = m.coupling(i, j);
                if (h_ij != 0.0) c.rzz_param(i, j, gamma_slot, 2.0 * h_ij);
            }
        }
        for (int i = 0; i < m.n; ++i) {
            if (m.fields[i] != 0.0) c.rz_param(i, gamma_slot, 2.0 * m.fields[i]);
        }
        for (int q = 0; q < m.n; ++q) c.rx_param(q, beta_slot, 2.0);
    }
    // A fully zero Hamiltonian leaves gamma slots unused; pin them so the
    // slot layout stays 2p regardless of sparsity.
    bool gamma_used = false;
    for (const Gate& g : c.gates())
        if (g.slot >= 0 && g.slot % 2 == 0) { gamma_used = true; break; }
    if (!gamma_used)
        for (int layer = 0; layer < reps; ++layer) c.rz_param(0, 2 * layer, 0.0);
    c.validate();
    return c;
}

Circuit build_ansatz(const IsingModel& m, const AnsatzSpec& spec) {
    if (spec.kind == AnsatzSpec::Kind::Heuristic)
        return build_heuristic_ansatz(spec.n_qubits > 0 ? spec.n_qubits : m.n, spec.reps);
    return build_qaoa_ansatz(m, spec.reps);
}

namespace {

struct StartOutcome {
    double expectation = std::numeric_limits<double>::infinity();
    std::vector<double> params;
    bool ok = false;
    std::string error;
};

}  // namespace

SolveResult solve(const IsingModel& m, const AnsatzSpec& spec, const SolveConfig& cfg) {
    if (m.n > 20) throw DimensionMismatch("solve: n must be <= 20");
    if (cfg.starts < 1 || cfg.final_shots < 1)
        throw DimensionMismatch("solve: starts and final_shots must be >= 1");

    const Circuit ansatz = build_ansatz(m, spec);
    const int n_params = ansatz.param_count();
    const Rng base(cfg.seed);

    std::vector<StartOutcome> outcomes(cfg.starts);
    parallel_for(cfg.starts, cfg.workers, [&](std::size_t s) {
        StartOutcome& out = outcomes[s];
        try {
            Rng rng = base.derive(s);
            std::vector<double> x0(n_params);
            for (double& v : x0) v = rng.uniform(0.0, 2.0 * 3.141592653589793238462643383279502884);
            MinimizeConfig opt = cfg.optimizer;
            opt.gradient = [&](std::span<const double> p) {
                return expectation_with_gradient(ansatz, p, m.energy_table).gradient;
            };
            const auto objective = [&](std::span<const double> p) {
                StateVector psi(ansatz.n_qubits());
                apply_circuit_inplace(psi, ansatz, p);
                return expectation_diagonal(psi, m.energy_table);
            };
            MinimizeResult res = minimize_local(objective, std::move(x0), opt);
            out.expectation = res.fx;
            out.params = std::move(res.x);
            out.ok = true;
        } catch (const Error& e) {
            out.error = e.what();
        }
    });

    int winner = -1;
    for (int s = 0; s < cfg.starts; ++s) {
        if (!outcomes[s].ok) continue;
        if (winner < 0 || outcomes[s].expectation < outcomes[winner].expectation) winner = s;
    }
    if (winner < 0)
        throw NoConvergence("solve: every start failed; last error: " +
                            outcomes[cfg.starts - 1].error);

    SolveResult result;
    result.best_start = winner;
    result.best_params = outcomes[winner].params;
    result.ansatz_expectation = outcomes[winner].expectation;

    const SearchResult search = exhaustive_search(m, m.budget);
    result.e_best = search.best_energy;
    result.e_worst = search.worst_energy;
    result.ansatz_ar =
        approximation_ratio(result.ansatz_expectation, search.best_energy, search.worst_energy);

    StateVector optimal(ansatz.n_qubits());
    apply_circuit_inplace(optimal, ansatz, result.best_params);
    result.analytic_variance = energy_moments(optimal, m.energy_table).variance;

    Rng shot_rng = base.derive(std::uint64_t(1) << 32);
    result.samples = sample(optimal, static_cast<std::uint64_t>(cfg.final_shots), shot_rng);

    bool have = false;
    for (const auto& [bits, count] : result.samples) {
        const std::size_t z = bits_to_index(bits);
        const double e = m.energy(z);
        if (!have || e < result.sampled.energy) {
            result.sampled.bitstring = bits;
            result.sampled.index = z;
            result.sampled.energy = e;
            have = true;
        }
    }
    result.sampled.feasible = std::popcount(result.sampled.index) == m.budget;
    result.sampled.ar =
        approximation_ratio(result.sampled.energy, search.best_energy, search.worst_energy);
    return result;
}

VarianceReport ansatz_variance(const IsingModel& m, const Circuit& c,
                               std::span<const double> params, std::uint64_t shots, Rng& rng) {
    if (shots < 2) throw DimensionMismatch("ansatz_variance: shots must be >= 2");
    StateVector psi(c.n_qubits());
    apply_circuit_inplace(psi, c, params);
    VarianceReport rep;
    rep.analytic = energy_moments(psi, m.energy_table).variance;

    const auto counts = sample(psi, shots, rng);
    double mean = 0.0;
    for (const auto& [bits, count] : counts)
        mean += static_cast<double>(count) * m.energy(bits_to_index(bits));
    mean /= static_cast<double>(shots);
    double ss = 0.0;
    for (const auto& [bits, count] : counts) {
        const double d = m.energy(bits_to_index(bits)) - mean;
        ss += static_cast<double>(count) * d * d;
    }
    rep.sampled = ss / static_cast<double>(shots - 1);
    return rep;
}

nlohmann::json solve_result_to_json(const SolveResult& r) {
    nlohmann::json samples = nlohmann::json::object();
    for (const auto& [bits, count] : r.samples) samples[bits] = count;
    return nlohmann::json{
        {"best_start", r.best_start},
        {"params", r.best_params},
        {"expectation", r.ansatz_expectation},
        {"ansatz_ar", r.ansatz_ar},
        {"analytic_variance", r.analytic_variance},
        {"e_best", r.e_best},
        {"e_worst", r.e_worst},
        {"samples", samples},
        {"solution", nlohmann::json{{"bitstring", r.sampled.bitstring},
                                    {"energy", r.sampled.energy},
                                    {"feasible", r.sampled.feasible},
                                    {"ar", r.sampled.ar}}},
    };
}

}  // namespace qbl
