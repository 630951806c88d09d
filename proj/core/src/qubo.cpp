#include "qbl/qubo.hpp"

#include <bit>
#include <cmath>

namespace qbl {

double QuboProblem::value(std::size_t x_bits) const {
    double acc = 0.0;
    int ones = 0;
    for (int i = 0; i < n; ++i) {
        if (!((x_bits >> i) & 1)) continue;
        ++ones;
        acc += linear[i];
        acc += quadratic(i, i);
        for (int j = i + 1; j < n; ++j)
            if ((x_bits >> j) & 1) acc += 2.0 * quadratic(i, j);
    }
    const double violation = static_cast<double>(ones - budget);
    return acc + lambda * violation * violation;
}

QuboProblem build_qubo(const SymMatrix& sigma, const std::vector<double>& mu, double gamma_eff,
                       double lambda, int budget) {
    const int n = sigma.dim();
    if (static_cast<int>(mu.size()) != n)
        throw DimensionMismatch("build_qubo: mu length != sigma dim");
    if (lambda < 0.0) throw DimensionMismatch("build_qubo: lambda must be >= 0");
    if (budget < 1 || budget > n)
        throw DimensionMismatch("build_qubo: budget must be in 1..n");
    QuboProblem q;
    q.n = n;
    q.quadratic = sigma.scaled(0.5 * gamma_eff);
    q.linear.resize(n);
    for (int i = 0; i < n; ++i) q.linear[i] = -mu[i];
    q.lambda = lambda;
    q.budget = budget;
    return q;
}

QuboProblem build_qubo(const QuboInstance& inst) {
    return build_qubo(inst.sigma, inst.mu, inst.gamma_eff, inst.lambda, inst.budget);
}

nlohmann::json instance_to_json(const QuboInstance& inst) {
    const int n = inst.sigma.dim();
    nlohmann::json sigma = nlohmann::json::array();
    for (int i = 0; i < n; ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (int j = 0; j < n; ++j) row.push_back(inst.sigma(i, j));
        sigma.push_back(std::move(row));
    }
    return nlohmann::json{{"n", n},           {"sigma", sigma},
                          {"mu", inst.mu},    {"gamma_eff", inst.gamma_eff},
                          {"lambda", inst.lambda}, {"budget", inst.budget}};
}

QuboInstance instance_from_json(const nlohmann::json& j) {
    QuboInstance inst;
    const int n = j.at("n").get<int>();
    if (n < 1) throw ParseError("instance: n must be >= 1");
    const auto& sigma = j.at("sigma");
    if (static_cast<int>(sigma.size()) != n) throw ParseError("instance: sigma must be n x n");
    inst.sigma = SymMatrix(n);
    for (int i = 0; i < n; ++i) {
        const auto& row = sigma.at(i);
        if (static_cast<int>(row.size()) != n) throw ParseError("instance: sigma must be n x n");
        for (int jj = i; jj < n; ++jj) {
            const double a = row.at(jj).get<double>();
            const double b = sigma.at(jj).at(i).get<double>();
            if (std::abs(a - b) > 1e-12 * std::max(1.0, std::abs(a)))
                throw ParseError("instance: sigma is not symmetric");
            inst.sigma.set(i, jj, a);
        }
    }
    inst.mu = j.at("mu").get<std::vector<double>>();
    if (static_cast<int>(inst.mu.size()) != n) throw ParseError("instance: mu length != n");
    inst.gamma_eff = j.at("gamma_eff").get<double>();
    inst.lambda = j.at("lambda").get<double>();
    inst.budget = j.at("budget").get<int>();
    if (inst.budget < 1 || inst.budget > n) throw ParseError("instance: budget must be in 1..n");
    if (inst.lambda < 0.0) throw ParseError("instance: lambda must be >= 0");
    return inst;
}

double& IsingModel::coupling(int i, int j) {
    if (i > j) std::swap(i, j);
    return couplings[static_cast<std::size_t>(i) * n - i * (i + 1) / 2 + (j - i - 1)];
}

double IsingModel::coupling(int i, int j) const {
    if (i > j) std::swap(i, j);
    return couplings[static_cast<std::size_t>(i) * n - i * (i + 1) / 2 + (j - i - 1)];
}

double IsingModel::energy_direct(std::size_t z) const {
    // Spin convention: bit 0 -> Z = +1, bit 1 -> Z = -1 (x = (1 - Z)/2).
    double acc = offset;
    for (int i = 0; i < n; ++i) {
        const double zi = ((z >> i) & 1) ? -1.0 : 1.0;
        acc += fields[i] * zi;
        for (int j = i + 1; j < n; ++j) {
            const double zj = ((z >> j) & 1) ? -1.0 : 1.0;
            acc += coupling(i, j) * zi * zj;
        }
    }
    return acc;
}

IsingModel to_ising(const QuboProblem& q) {
    const int n = q.n;
    if (n > 20) throw DimensionMismatch("to_ising: n must be <= 20");
    IsingModel m;
    m.n = n;
    m.budget = q.budget;
    m.couplings.assign(static_cast<std::size_t>(n) * (n - 1) / 2, 0.0);
    m.fields.assign(n, 0.0);

    // Fold the penalty expansion into effective pair/linear/constant parts:
    //   lambda (1'x - B)^2 = lambda (sum_i x_i + 2 sum_{i<j} x_i x_j
    //                               - 2B sum_i x_i + B^2)        (x_i^2 = x_i)
    // pair coefficient of x_i x_j (i < j): 2 quadratic_ij + 2 lambda
    // linear coefficient of x_i: quadratic_ii + linear_i + lambda (1 - 2B)
    // constant: lambda B^2
    const double b = static_cast<double>(q.budget);
    double constant = q.lambda * b * b;
    double c_sum = 0.0;
    std::vector<double> l(n);
    for (int i = 0; i < n; ++i) l[i] = q.quadratic(i, i) + q.linear[i] + q.lambda * (1.0 - 2.0 * b);

    // Substitute x = (1 - Z)/2:
    //   x_i x_j = (1 - Z_i - Z_j + Z_i Z_j)/4,   x_i = (1 - Z_i)/2
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            const double pair = 2.0 * q.quadratic(i, j) + 2.0 * q.lambda;
            m.coupling(i, j) = 0.25 * pair;
            m.fields[i] -= 0.25 * pair;
            m.fields[j] -= 0.25 * pair;
            c_sum += 0.25 * pair;
        }
        m.fields[i] -= 0.5 * l[i];
        c_sum += 0.5 * l[i];
    }
    m.offset = constant + c_sum;

    // Energy table in Gray-code order: one spin flips per step, O(n) update.
    const std::size_t dim = std::size_t(1) << n;
    m.energy_table.n_qubits = n;
    m.energy_table.energy.assign(dim, 0.0);
    std::vector<double> spin(n, 1.0);  // z = 0 -> all Z = +1
    double e = m.offset;
    for (int i = 0; i < n; ++i) {
        e += m.fields[i];
        for (int j = i + 1; j < n; ++j) e += m.coupling(i, j);
    }
    m.energy_table.energy[0] = e;
    std::size_t gray = 0;
    for (std::size_t k = 1; k < dim; ++k) {
        const int flip = std::countr_zero(k);
        double local = m.fields[flip];
        for (int j = 0; j < n; ++j)
            if (j != flip) local += m.coupling(flip, j) * spin[j];
        e -= 2.0 * spin[flip] * local;
        spin[flip] = -spin[flip];
        gray ^= std::size_t(1) << flip;
        m.energy_table.energy[gray] = e;
    }

    if (n <= 16) {
        for (std::size_t z = 0; z < dim; ++z) {
            const double direct = m.energy_direct(z);
            if (std::abs(direct - m.energy_table.energy[z]) >
                1e-9 * std::max(1.0, std::abs(direct)))
                throw NoConvergence("to_ising: energy table verification failed at state " +
                                    std::to_string(z));
        }
    }
    return m;
}

SearchResult exhaustive_search(const IsingModel& m, int budget) {
    if (budget > m.n || budget < 0)
        throw NoFeasibleState("exhaustive_search: budget " + std::to_string(budget) +
                              " exceeds asset count " + std::to_string(m.n));
    const std::size_t dim = std::size_t(1) << m.n;
    SearchResult r;
    bool found = false;
    for (std::size_t z = 0; z < dim; ++z) {
        if (std::popcount(z) != budget) continue;
        const double e = m.energy(z);
        if (!found) {
            r.best_energy = r.worst_energy = e;
            r.best_state = r.worst_state = z;
            found = true;
        } else {
            if (e < r.best_energy) { r.best_energy = e; r.best_state = z; }
            if (e > r.worst_energy) { r.worst_energy = e; r.worst_state = z; }
        }
        ++r.feasible_count;
    }
    if (!found) throw NoFeasibleState("exhaustive_search: no state satisfies the budget");
    return r;
}

double approximation_ratio(double e, double e_best, double e_worst) {
    if (e_best == e_worst)
        throw DegenerateSpectrum("approximation_ratio: E* == E_w");
    if (e_best > e_worst)
        throw DegenerateSpectrum("approximation_ratio: E* must be below E_w");
    return (e - e_worst) / (e_best - e_worst);
}

PenaltyReport penalty_report(const QuboProblem& q) {
    if (q.n > 20) throw DimensionMismatch("penalty_report: n must be <= 20");
    const IsingModel m = to_ising(q);
    const std::size_t dim = std::size_t(1) << q.n;
    PenaltyReport rep;
    bool have_infeasible = false;
    for (std::size_t z = 0; z < dim; ++z) {
        if (std::popcount(z) == q.budget) continue;
        const double e = m.energy(z);
        if (!have_infeasible || e < rep.lowest_infeasible) rep.lowest_infeasible = e;
        have_infeasible = true;
    }
    if (!have_infeasible) return rep;  // degenerate: nothing to separate
    std::size_t feasible = 0, below = 0;
    for (std::size_t z = 0; z < dim; ++z) {
        if (std::popcount(z) != q.budget) continue;
        ++feasible;
        if (m.energy(z) < rep.lowest_infeasible) ++below;
    }
    if (feasible == 0) return rep;
    rep.fraction_feasible_below = static_cast<double>(below) / static_cast<double>(feasible);
    rep.ok = rep.fraction_feasible_below >= 0.5 && rep.fraction_feasible_below < 1.0;
    return rep;
}

double random_sampling_p(const IsingModel& m, int budget, double g) {
    const SearchResult r = exhaustive_search(m, budget);
    if (r.best_energy == r.worst_energy)
        throw DegenerateSpectrum("random_sampling_p: degenerate feasible spectrum");
    const std::size_t dim = std::size_t(1) << m.n;
    std::size_t hits = 0;
    for (std::size_t z = 0; z < dim; ++z)
        if (approximation_ratio(m.energy(z), r.best_energy, r.worst_energy) >= g) ++hits;
    return static_cast<double>(hits) / static_cast<double>(dim);
}

std::int64_t max_justified_shots(double p_g) {
    if (!(p_g > 0.0) || !(p_g < 1.0))
        throw InvalidProbability("max_justified_shots: P_g must be in (0, 1)");
    // 1 - (1-P)^K <= 2/3  <=>  K <= ln(3) / -ln(1-P)
    const double k = std::log(3.0) / -std::log1p(-p_g);
    return static_cast<std::int64_t>(std::floor(k));
}

double prob_reach(double p_g, std::int64_t k) {
    if (p_g < 0.0 || p_g > 1.0)
        throw InvalidProbability("prob_reach: P_g must be in [0, 1]");
    if (k < 0) throw InvalidProbability("prob_reach: K must be >= 0");
    return 1.0 - std::pow(1.0 - p_g, static_cast<double>(k));
}

}  // namespace qbl
