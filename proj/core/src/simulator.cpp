#include "qbl/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace qbl {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kInvSqrt2 = 0.70710678118654752440084436210485;
}  // namespace

StateVector::StateVector(int n_qubits) : n_qubits_(n_qubits) {
    if (n_qubits < 1 || n_qubits > 20)
        throw DimensionMismatch("StateVector supports 1..20 qubits, got " +
                                std::to_string(n_qubits));
    amps_.assign(std::size_t(1) << n_qubits, Amplitude(0.0, 0.0));
    amps_[0] = Amplitude(1.0, 0.0);
}

StateVector StateVector::basis(int n_qubits, std::size_t z) {
    StateVector s(n_qubits);
    if (z >= s.size()) throw DimensionMismatch("basis index out of range");
    s.amps_[0] = Amplitude(0.0, 0.0);
    s.amps_[z] = Amplitude(1.0, 0.0);
    return s;
}

double StateVector::norm() const {
    double acc = 0.0;
    for (const auto& a : amps_) acc += std::norm(a);
    return std::sqrt(acc);
}

std::string index_to_bits(std::size_t z, int n_qubits) {
    std::string bits(n_qubits, '0');
    for (int q = 0; q < n_qubits; ++q)
        if ((z >> q) & 1) bits[q] = '1';
    return bits;
}

std::size_t bits_to_index(const std::string& bits) {
    std::size_t z = 0;
    for (std::size_t q = 0; q < bits.size(); ++q) {
        if (bits[q] == '1')
            z |= std::size_t(1) << q;
        else if (bits[q] != '0')
            throw ParseError("bitstring must contain only 0/1");
    }
    return z;
}

double Gate::resolve_angle(std::span<const double> params) const {
    switch (form) {
        case AngleForm::Bound: return angle;
        case AngleForm::Scaled: return scale * params[slot];
        case AngleForm::PauliProduct:
            return scale * (kPi - params[slot]) * (kPi - params[slot2]);
    }
    return angle;
}

void Circuit::push(Gate g) {
    if (g.slot >= param_count_) param_count_ = g.slot + 1;
    if (g.slot2 >= param_count_) param_count_ = g.slot2 + 1;
    gates_.push_back(g);
}

void Circuit::h(int q) { push({GateKind::H, q}); }
void Circuit::rx(int q, double angle) { push({GateKind::RX, q, -1, AngleForm::Bound, angle}); }
void Circuit::ry(int q, double angle) { push({GateKind::RY, q, -1, AngleForm::Bound, angle}); }
void Circuit::rz(int q, double angle) { push({GateKind::RZ, q, -1, AngleForm::Bound, angle}); }

void Circuit::rx_param(int q, int slot, double scale) {
    push({GateKind::RX, q, -1, AngleForm::Scaled, 0.0, slot, -1, scale});
}
void Circuit::ry_param(int q, int slot, double scale) {
    push({GateKind::RY, q, -1, AngleForm::Scaled, 0.0, slot, -1, scale});
}
void Circuit::rz_param(int q, int slot, double scale) {
    push({GateKind::RZ, q, -1, AngleForm::Scaled, 0.0, slot, -1, scale});
}
void Circuit::rz_pauli_product(int q, int slot, int slot2, double scale) {
    push({GateKind::RZ, q, -1, AngleForm::PauliProduct, 0.0, slot, slot2, scale});
}
void Circuit::cnot(int control, int target) {
    push({GateKind::CNOT, target, control});
}
void Circuit::cz(int a, int b) { push({GateKind::CZ, a, b}); }
void Circuit::rzz(int a, int b, double angle) {
    push({GateKind::RZZ, a, b, AngleForm::Bound, angle});
}
void Circuit::rzz_param(int a, int b, int slot, double scale) {
    push({GateKind::RZZ, a, b, AngleForm::Scaled, 0.0, slot, -1, scale});
}

void Circuit::append(const Circuit& other) {
    if (other.n_qubits_ != n_qubits_)
        throw DimensionMismatch("Circuit::append: qubit counts differ");
    gates_.insert(gates_.end(), other.gates_.begin(), other.gates_.end());
    param_count_ = std::max(param_count_, other.param_count_);
}

Circuit Circuit::bound(std::span<const double> params) const {
    if (static_cast<int>(params.size()) != param_count_)
        throw DimensionMismatch("Circuit::bound: expected " + std::to_string(param_count_) +
                                " parameters, got " + std::to_string(params.size()));
    Circuit out(n_qubits_);
    for (Gate g : gates_) {
        if (g.is_parametric()) {
            g.angle = g.resolve_angle(params);
            g.form = AngleForm::Bound;
            g.slot = g.slot2 = -1;
        }
        out.gates_.push_back(g);
    }
    return out;
}

void Circuit::validate() const {
    std::vector<bool> seen(param_count_, false);
    for (const Gate& g : gates_) {
        if (g.target < 0 || g.target >= n_qubits_)
            throw DimensionMismatch("gate target out of range");
        const bool two_qubit =
            g.kind == GateKind::CNOT || g.kind == GateKind::CZ || g.kind == GateKind::RZZ;
        if (two_qubit) {
            if (g.control < 0 || g.control >= n_qubits_)
                throw DimensionMismatch("gate control out of range");
            if (g.control == g.target) throw DimensionMismatch("two-qubit gate needs distinct qubits");
        }
        if (g.slot >= 0) seen[g.slot] = true;
        if (g.slot2 >= 0) seen[g.slot2] = true;
    }
    for (int s = 0; s < param_count_; ++s)
        if (!seen[s])
            throw DimensionMismatch("parameter slots are not contiguous: slot " +
                                    std::to_string(s) + " unused");
}

namespace {

const char* gate_name(GateKind k) {
    switch (k) {
        case GateKind::RX: return "rx";
        case GateKind::RY: return "ry";
        case GateKind::RZ: return "rz";
        case GateKind::H: return "h";
        case GateKind::CNOT: return "cnot";
        case GateKind::CZ: return "cz";
        case GateKind::RZZ: return "rzz";
    }
    return "?";
}

void apply_single(StateVector& state, int q, Amplitude m00, Amplitude m01, Amplitude m10,
                  Amplitude m11) {
    const std::size_t dim = state.size();
    const std::size_t stride = std::size_t(1) << q;
    for (std::size_t group = 0; group < dim; group += 2 * stride) {
        for (std::size_t off = 0; off < stride; ++off) {
            const std::size_t i0 = group + off;
            const std::size_t i1 = i0 + stride;
            const Amplitude a0 = state[i0];
            const Amplitude a1 = state[i1];
            state[i0] = m00 * a0 + m01 * a1;
            state[i1] = m10 * a0 + m11 * a1;
        }
    }
}

void apply_ry(StateVector& state, int q, double theta) {
    const double c = std::cos(0.5 * theta);
    const double s = std::sin(0.5 * theta);
    const std::size_t dim = state.size();
    const std::size_t stride = std::size_t(1) << q;
    for (std::size_t group = 0; group < dim; group += 2 * stride) {
        for (std::size_t off = 0; off < stride; ++off) {
            const std::size_t i0 = group + off;
            const std::size_t i1 = i0 + stride;
            const Amplitude a0 = state[i0];
            const Amplitude a1 = state[i1];
            state[i0] = c * a0 - s * a1;
            state[i1] = s * a0 + c * a1;
        }
    }
}

void apply_rz(StateVector& state, int q, double theta) {
    const Amplitude p0 = std::polar(1.0, -0.5 * theta);
    const Amplitude p1 = std::polar(1.0, 0.5 * theta);
    const std::size_t dim = state.size();
    const std::size_t mask = std::size_t(1) << q;
    for (std::size_t z = 0; z < dim; ++z) state[z] *= (z & mask) ? p1 : p0;
}

void apply_rx(StateVector& state, int q, double theta) {
    const double c = std::cos(0.5 * theta);
    const Amplitude is(0.0, -std::sin(0.5 * theta));
    apply_single(state, q, Amplitude(c, 0.0), is, is, Amplitude(c, 0.0));
}

void apply_h(StateVector& state, int q) {
    apply_single(state, q, Amplitude(kInvSqrt2, 0.0), Amplitude(kInvSqrt2, 0.0),
                 Amplitude(kInvSqrt2, 0.0), Amplitude(-kInvSqrt2, 0.0));
}

void apply_cnot(StateVector& state, int control, int target) {
    const std::size_t dim = state.size();
    const std::size_t cmask = std::size_t(1) << control;
    const std::size_t tmask = std::size_t(1) << target;
    for (std::size_t z = 0; z < dim; ++z)
        if ((z & cmask) && !(z & tmask)) std::swap(state[z], state[z | tmask]);
}

void apply_cz(StateVector& state, int a, int b) {
    const std::size_t dim = state.size();
    const std::size_t amask = std::size_t(1) << a;
    const std::size_t bmask = std::size_t(1) << b;
    for (std::size_t z = 0; z < dim; ++z)
        if ((z & amask) && (z & bmask)) state[z] = -state[z];
}

void apply_rzz(StateVector& state, int a, int b, double theta) {
    const Amplitude even = std::polar(1.0, -0.5 * theta);  // Z_a Z_b = +1
    const Amplitude odd = std::polar(1.0, 0.5 * theta);
    const std::size_t dim = state.size();
    const std::size_t amask = std::size_t(1) << a;
    const std::size_t bmask = std::size_t(1) << b;
    for (std::size_t z = 0; z < dim; ++z) {
        const bool differ = static_cast<bool>(z & amask) != static_cast<bool>(z & bmask);
        state[z] *= differ ? odd : even;
    }
}

void apply_gate(StateVector& state, const Gate& g, double angle) {
    switch (g.kind) {
        case GateKind::RX: apply_rx(state, g.target, angle); break;
        case GateKind::RY: apply_ry(state, g.target, angle); break;
        case GateKind::RZ: apply_rz(state, g.target, angle); break;
        case GateKind::H: apply_h(state, g.target); break;
        case GateKind::CNOT: apply_cnot(state, g.control, g.target); break;
        case GateKind::CZ: apply_cz(state, g.control, g.target); break;
        case GateKind::RZZ: apply_rzz(state, g.control, g.target, angle); break;
    }
}

void apply_gate_inverse(StateVector& state, const Gate& g, double angle) {
    apply_gate(state, g, -angle);  // H/CNOT/CZ ignore the angle and are self-inverse
}

/// In-place generator Pauli of each rotation kind (X, Y, Z or ZZ). Applying
/// it twice restores the state exactly.
void apply_generator_pauli(StateVector& state, const Gate& g) {
    const std::size_t dim = state.size();
    switch (g.kind) {
        case GateKind::RX: {
            const std::size_t stride = std::size_t(1) << g.target;
            for (std::size_t group = 0; group < dim; group += 2 * stride)
                for (std::size_t off = 0; off < stride; ++off)
                    std::swap(state[group + off], state[group + off + stride]);
            break;
        }
        case GateKind::RY: {
            const std::size_t stride = std::size_t(1) << g.target;
            for (std::size_t group = 0; group < dim; group += 2 * stride) {
                for (std::size_t off = 0; off < stride; ++off) {
                    const std::size_t i0 = group + off;
                    const std::size_t i1 = i0 + stride;
                    const Amplitude a0 = state[i0];
                    const Amplitude a1 = state[i1];
                    state[i0] = Amplitude(a1.imag(), -a1.real());   // -i * a1
                    state[i1] = Amplitude(-a0.imag(), a0.real());   //  i * a0
                }
            }
            break;
        }
        case GateKind::RZ: {
            const std::size_t mask = std::size_t(1) << g.target;
            for (std::size_t z = 0; z < dim; ++z)
                if (z & mask) state[z] = -state[z];
            break;
        }
        case GateKind::RZZ: {
            const std::size_t amask = std::size_t(1) << g.control;
            const std::size_t bmask = std::size_t(1) << g.target;
            for (std::size_t z = 0; z < dim; ++z) {
                const bool differ = static_cast<bool>(z & amask) != static_cast<bool>(z & bmask);
                if (differ) state[z] = -state[z];
            }
            break;
        }
        default:
            throw UnsupportedSpec("generator Pauli requested for a non-rotation gate");
    }
}

}  // namespace

void apply_circuit_inplace(StateVector& state, const Circuit& c, std::span<const double> params) {
    if (state.n_qubits() != c.n_qubits())
        throw DimensionMismatch("apply_circuit: state has " + std::to_string(state.n_qubits()) +
                                " qubits, circuit has " + std::to_string(c.n_qubits()));
    if (static_cast<int>(params.size()) != c.param_count())
        throw DimensionMismatch("apply_circuit: expected " + std::to_string(c.param_count()) +
                                " parameters, got " + std::to_string(params.size()));
    for (const Gate& g : c.gates()) apply_gate(state, g, g.resolve_angle(params));
}

StateVector apply_circuit(const StateVector& state, const Circuit& c,
                          std::span<const double> params) {
    StateVector out = state;
    apply_circuit_inplace(out, c, params);
    return out;
}

double expectation_diagonal(const StateVector& state, const EnergyTable& e) {
    if (e.n_qubits != state.n_qubits() || e.energy.size() != state.size())
        throw DimensionMismatch("expectation_diagonal: table/state qubit counts differ");
    double acc = 0.0;
    for (std::size_t z = 0; z < state.size(); ++z) acc += std::norm(state[z]) * e.energy[z];
    return acc;
}

std::map<std::string, std::uint64_t> sample(const StateVector& state, std::uint64_t shots,
                                            Rng& rng) {
    const std::size_t dim = state.size();
    std::vector<double> cdf(dim);
    double acc = 0.0;
    for (std::size_t z = 0; z < dim; ++z) {
        acc += state.probability(z);
        cdf[z] = acc;
    }
    const double total = acc;
    std::map<std::string, std::uint64_t> counts;
    for (std::uint64_t shot = 0; shot < shots; ++shot) {
        const double u = rng.uniform01() * total;
        const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
        const std::size_t z = std::min<std::size_t>(it - cdf.begin(), dim - 1);
        ++counts[index_to_bits(z, state.n_qubits())];
    }
    return counts;
}

ExpectationGradient expectation_with_gradient(const Circuit& c, std::span<const double> params,
                                              const EnergyTable& table) {
    StateVector psi(c.n_qubits());
    apply_circuit_inplace(psi, c, params);
    if (table.n_qubits != c.n_qubits() || table.energy.size() != psi.size())
        throw DimensionMismatch("expectation_with_gradient: table size mismatch");

    StateVector lam = psi;
    double value = 0.0;
    for (std::size_t z = 0; z < psi.size(); ++z) {
        value += std::norm(psi[z]) * table.energy[z];
        lam[z] = table.energy[z] * psi[z];
    }

    ExpectationGradient out;
    out.value = value;
    out.gradient.assign(c.param_count(), 0.0);

    const auto& gates = c.gates();
    for (auto it = gates.rbegin(); it != gates.rend(); ++it) {
        const Gate& g = *it;
        const double angle = g.resolve_angle(params);
        if (g.is_parametric()) {
            if (g.form != AngleForm::Scaled)
                throw UnsupportedSpec(
                    "expectation_with_gradient: only Scaled parametric gates are "
                    "differentiable; bind the feature map first");
            // dE/dangle = Im( <lambda| P |psi_after> ), with dU/dangle = -(i/2) P U.
            apply_generator_pauli(psi, g);
            double d = 0.0;
            for (std::size_t z = 0; z < psi.size(); ++z) {
                const Amplitude l = lam[z];
                const Amplitude p = psi[z];
                d += l.real() * p.imag() - l.imag() * p.real();  // Im(conj(l) * p)
            }
            apply_generator_pauli(psi, g);  // exact restore, Pauli^2 = I
            out.gradient[g.slot] += g.scale * d;
        }
        apply_gate_inverse(psi, g, angle);
        apply_gate_inverse(lam, g, angle);
    }
    return out;
}

EnergyMoments energy_moments(const StateVector& state, const EnergyTable& table) {
    if (table.n_qubits != state.n_qubits())
        throw DimensionMismatch("energy_moments: table/state qubit counts differ");
    EnergyMoments m;
    for (std::size_t z = 0; z < state.size(); ++z)
        m.mean += state.probability(z) * table.energy[z];
    for (std::size_t z = 0; z < state.size(); ++z) {
        const double p = state.probability(z);
        const double d = table.energy[z] - m.mean;
        m.variance += p * d * d;
        m.fourth_central += p * d * d * d * d;
    }
    return m;
}

std::vector<std::pair<int, int>> entanglement_pairs(Entanglement e, int n_qubits) {
    std::vector<std::pair<int, int>> pairs;
    switch (e) {
        case Entanglement::None: break;
        case Entanglement::Linear:
            for (int i = 0; i + 1 < n_qubits; ++i) pairs.emplace_back(i, i + 1);
            break;
        case Entanglement::Circular:
            for (int i = 0; i + 1 < n_qubits; ++i) pairs.emplace_back(i, i + 1);
            if (n_qubits > 2) pairs.emplace_back(n_qubits - 1, 0);
            break;
        case Entanglement::Full:
            for (int i = 0; i < n_qubits; ++i)
                for (int j = i + 1; j < n_qubits; ++j) pairs.emplace_back(i, j);
            break;
    }
    return pairs;
}

namespace {

void add_pauli_phase_block(Circuit& c, const FeatureMapSpec& spec) {
    const int n = spec.n_features;
    for (int q = 0; q < n; ++q) c.h(q);
    const auto pairs = entanglement_pairs(spec.entanglement, n);
    for (const std::string& term : spec.paulis) {
        if (term.size() == 1) {
            const char p = term[0];
            for (int q = 0; q < n; ++q) {
                if (p == 'X') c.h(q);
                if (p == 'Y') c.rx(q, 0.5 * kPi);
                c.rz_param(q, q, 2.0);
                if (p == 'X') c.h(q);
                if (p == 'Y') c.rx(q, -0.5 * kPi);
            }
        } else if (term.size() == 2) {
            if (spec.entanglement == Entanglement::None)
                throw UnsupportedSpec("pauli feature map: two-qubit term '" + term +
                                      "' needs an entanglement structure");
            for (const auto& [i, j] : pairs) {
                const char pi_ = term[0];
                const char pj = term[1];
                auto basis_in = [&](char p, int q) {
                    if (p == 'X') c.h(q);
                    if (p == 'Y') c.rx(q, 0.5 * kPi);
                };
                auto basis_out = [&](char p, int q) {
                    if (p == 'X') c.h(q);
                    if (p == 'Y') c.rx(q, -0.5 * kPi);
                };
                basis_in(pi_, i);
                basis_in(pj, j);
                c.cnot(i, j);
                c.rz_pauli_product(j, i, j, 2.0);
                c.cnot(i, j);
                basis_out(pj, j);
                basis_out(pi_, i);
            }
        } else {
            throw UnsupportedSpec("pauli feature map: term '" + term +
                                  "' must have one or two characters");
        }
    }
}

}  // namespace

Circuit build_feature_map(const FeatureMapSpec& spec) {
    if (spec.n_features < 1) throw UnsupportedSpec("feature map needs at least one feature");
    if (spec.reps < 0) throw UnsupportedSpec("feature map repetitions must be >= 0");
    Circuit c(spec.n_features);
    if (spec.kind == FeatureMapSpec::Kind::Simple) {
        auto rotation_layer = [&] {
            for (int q = 0; q < spec.n_features; ++q) c.ry_param(q, q, 1.0);
        };
        rotation_layer();
        const auto pairs = entanglement_pairs(spec.entanglement, spec.n_features);
        for (int rep = 0; rep < spec.reps; ++rep) {
            for (const auto& [i, j] : pairs) c.cnot(i, j);
            rotation_layer();
        }
    } else {
        for (const std::string& term : spec.paulis) {
            for (char p : term)
                if (p != 'X' && p != 'Y' && p != 'Z')
                    throw UnsupportedSpec("pauli feature map: unknown Pauli '" +
                                          std::string(1, p) + "'");
        }
        for (int block = 0; block < spec.reps + 1; ++block) add_pauli_phase_block(c, spec);
    }
    c.validate();
    return c;
}

double kernel_entry(std::span<const double> x1, std::span<const double> x2,
                    const FeatureMapSpec& fm) {
    if (static_cast<int>(x1.size()) != fm.n_features ||
        static_cast<int>(x2.size()) != fm.n_features)
        throw DimensionMismatch("kernel_entry: feature dimension mismatch");
    const Circuit c = build_feature_map(fm);
    StateVector psi1(c.n_qubits()), psi2(c.n_qubits());
    apply_circuit_inplace(psi1, c, x1);
    apply_circuit_inplace(psi2, c, x2);
    Amplitude overlap(0.0, 0.0);
    for (std::size_t z = 0; z < psi1.size(); ++z) overlap += std::conj(psi1[z]) * psi2[z];
    return std::clamp(std::norm(overlap), 0.0, 1.0);
}

nlohmann::json Circuit::to_json() const {
    nlohmann::json gates = nlohmann::json::array();
    for (const Gate& g : gates_) {
        nlohmann::json j;
        j["gate"] = gate_name(g.kind);
        j["target"] = g.target;
        if (g.control >= 0) j["control"] = g.control;
        switch (g.form) {
            case AngleForm::Bound:
                if (g.is_rotation()) j["angle"] = g.angle;
                break;
            case AngleForm::Scaled:
                j["slot"] = g.slot;
                j["scale"] = g.scale;
                break;
            case AngleForm::PauliProduct:
                j["slots"] = {g.slot, g.slot2};
                j["scale"] = g.scale;
                j["form"] = "pauli_product";
                break;
        }
        gates.push_back(std::move(j));
    }
    return nlohmann::json{{"n_qubits", n_qubits_}, {"params", param_count_}, {"gates", gates}};
}

}  // namespace qbl
