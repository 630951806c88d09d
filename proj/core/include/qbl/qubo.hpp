#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "qbl/numerics.hpp"
#include "qbl/simulator.hpp"

namespace qbl {

/// Budget-constrained portfolio selection in penalty form:
///   value(x) = x' quadratic x + linear . x + lambda (1'x - B)^2
/// with quadratic = (gamma_eff / 2) Sigma and linear = -mu when built by
/// build_qubo.
struct QuboProblem {
    int n = 0;
    SymMatrix quadratic;
    std::vector<double> linear;
    double lambda = 0.0;
    int budget = 0;

    double value(std::size_t x_bits) const;
};

/// build_qubo assembles (gamma_eff/2) x'Sigma x - mu'x + lambda (1'x - B)^2.
QuboProblem build_qubo(const SymMatrix& sigma, const std::vector<double>& mu, double gamma_eff,
                       double lambda, int budget);

/// Instance file schema used by the CLI: (Sigma, mu, gamma_eff, lambda, B).
struct QuboInstance {
    SymMatrix sigma;
    std::vector<double> mu;
    double gamma_eff = 1.0;
    double lambda = 0.0;
    int budget = 1;
};
QuboProblem build_qubo(const QuboInstance& inst);
nlohmann::json instance_to_json(const QuboInstance& inst);
QuboInstance instance_from_json(const nlohmann::json& j);

/// Diagonal spin Hamiltonian sum_{i<j} h_ij Z_i Z_j + sum_i h_i Z_i + C with
/// x = (1 - Z)/2, plus the precomputed per-bitstring energy table. `budget`
/// is carried along from the QUBO so downstream solvers can judge
/// feasibility and approximation ratios.
struct IsingModel {
    int n = 0;
    std::vector<double> couplings;  ///< h_ij for i<j, row-major upper triangle
    std::vector<double> fields;     ///< h_i
    double offset = 0.0;            ///< C
    int budget = 0;
    EnergyTable energy_table;

    double& coupling(int i, int j);
    double coupling(int i, int j) const;
    /// Direct evaluation of the Hamiltonian at basis state z (no table).
    double energy_direct(std::size_t z) const;
    double energy(std::size_t z) const { return energy_table.energy[z]; }
};

/// Maps a QUBO to its Ising form. The energy table is filled in Gray-code
/// order (O(2^n * n)) and, for n <= 16, verified against direct evaluation
/// on every bitstring.
IsingModel to_ising(const QuboProblem& q);

struct SearchResult {
    double best_energy = 0.0;
    std::size_t best_state = 0;
    double worst_energy = 0.0;
    std::size_t worst_state = 0;
    std::size_t feasible_count = 0;
};

/// Minimum/maximum energy over the feasible states (popcount == budget).
SearchResult exhaustive_search(const IsingModel& m, int budget);

/// AR = (E - E_w) / (E* - E_w); 1 at the optimum, 0 at the worst feasible
/// energy, negative for energies above E_w.
double approximation_ratio(double e, double e_best, double e_worst);

struct PenaltyReport {
    double lowest_infeasible = 0.0;
    double fraction_feasible_below = 0.0;
    bool ok = false;  ///< true iff 0.5 <= fraction_feasible_below < 1.0
};

/// Judges whether the penalty places the lowest constraint-violating state
/// above at least half of, but not all, feasible-state energies.
PenaltyReport penalty_report(const QuboProblem& q);

/// Probability that one uniform sample over all 2^n bitstrings reaches
/// AR >= g, computed exactly.
double random_sampling_p(const IsingModel& m, int budget, double g);

/// Largest K with 1 - (1 - P_g)^K <= 2/3, i.e. floor(ln 3 / -ln(1 - P_g)).
std::int64_t max_justified_shots(double p_g);

/// 1 - (1 - P_g)^K.
double prob_reach(double p_g, std::int64_t k);

}  // namespace qbl
