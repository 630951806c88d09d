#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "qbl/numerics.hpp"
#include "qbl/qubo.hpp"
#include "qbl/rng.hpp"
#include "qbl/simulator.hpp"

namespace qbl {

/// Variational circuit family. The heuristic form has 3N(p+1) parameters,
/// QAOA has 2p.
struct AnsatzSpec {
    enum class Kind { Heuristic, Qaoa };
    Kind kind = Kind::Heuristic;
    int n_qubits = 0;
    int reps = 1;  ///< p
};

/// p blocks of [RY(theta) RZ(phi) RY(lambda) on every qubit, then a CNOT
/// chain i -> i+1], closed by one more rotation layer. 3N(p+1) slots.
Circuit build_heuristic_ansatz(int n_qubits, int reps);

/// H on all qubits, then p alternating cost/mixer layers. Cost layer:
/// RZZ(2 gamma_l h_ij) per nonzero coupling and RZ(2 gamma_l h_i) per field;
/// mixer: RX(2 beta_l) per qubit. Slots alternate (gamma_0, beta_0, ...);
/// the offset C never enters the circuit (it is a global phase) and shows up
/// in expectations through the energy table.
Circuit build_qaoa_ansatz(const IsingModel& m, int reps);

Circuit build_ansatz(const IsingModel& m, const AnsatzSpec& spec);

struct SolveConfig {
    int starts = 10;
    int final_shots = 5;
    std::uint64_t seed = 0;
    int workers = 1;
    MinimizeConfig optimizer{.max_iters = 500, .f_tol = 1e-8};
};

struct Solution {
    std::string bitstring;
    std::size_t index = 0;
    double energy = 0.0;
    bool feasible = false;
    double ar = 0.0;
};

struct SolveResult {
    std::vector<double> best_params;
    int best_start = -1;
    double ansatz_expectation = 0.0;
    double ansatz_ar = 0.0;
    Solution sampled;                          ///< lowest-energy final-shot bitstring
    std::map<std::string, std::uint64_t> samples;
    double analytic_variance = 0.0;            ///< exact energy variance of the optimal state
    double e_best = 0.0;                       ///< E* from exhaustive search
    double e_worst = 0.0;                      ///< E_w from exhaustive search
};

/// Runs cfg.starts independent optimizations from seeded uniform [0, 2pi)
/// initial parameters (start s uses the child stream derived with id s, so
/// results do not depend on worker count), keeps the lowest converged
/// expectation (ties broken by start index), then draws cfg.final_shots
/// measurement shots from the winning circuit and returns the lowest-energy
/// sampled bitstring. Deterministic given cfg.seed.
SolveResult solve(const IsingModel& m, const AnsatzSpec& spec, const SolveConfig& cfg);

/// Samples `shots` energies from the state prepared by (c, params) and
/// reports the sample variance next to the exact one.
struct VarianceReport {
    double sampled = 0.0;
    double analytic = 0.0;
};
VarianceReport ansatz_variance(const IsingModel& m, const Circuit& c,
                               std::span<const double> params, std::uint64_t shots, Rng& rng);

nlohmann::json solve_result_to_json(const SolveResult& r);

}  // namespace qbl
