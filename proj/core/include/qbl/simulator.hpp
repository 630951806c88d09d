#pragma once

#include <complex>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "qbl/errors.hpp"
#include "qbl/rng.hpp"

namespace qbl {

using Amplitude = std::complex<double>;

/// Exact statevector over n qubits. Amplitude layout is little-endian:
/// qubit 0 is the least significant bit of the basis index, and everywhere a
/// bitstring is printed, character i is the value of qubit i.
class StateVector {
  public:
    explicit StateVector(int n_qubits);
    static StateVector basis(int n_qubits, std::size_t z);

    int n_qubits() const { return n_qubits_; }
    std::size_t size() const { return amps_.size(); }
    Amplitude& operator[](std::size_t z) { return amps_[z]; }
    const Amplitude& operator[](std::size_t z) const { return amps_[z]; }

    double norm() const;
    double probability(std::size_t z) const { return std::norm(amps_[z]); }

  private:
    int n_qubits_;
    std::vector<Amplitude> amps_;
};

std::string index_to_bits(std::size_t z, int n_qubits);
std::size_t bits_to_index(const std::string& bits);

enum class GateKind { RX, RY, RZ, H, CNOT, CZ, RZZ };

/// How a gate's rotation angle is obtained from the parameter vector.
///  Bound:        fixed `angle`
///  Scaled:       scale * params[slot]
///  PauliProduct: scale * (pi - params[slot]) * (pi - params[slot2]),
///                the pairwise phase of the Pauli feature map
enum class AngleForm { Bound, Scaled, PauliProduct };

struct Gate {
    GateKind kind = GateKind::RY;
    int target = 0;
    int control = -1;  ///< CNOT control; second qubit for CZ/RZZ
    AngleForm form = AngleForm::Bound;
    double angle = 0.0;
    int slot = -1;
    int slot2 = -1;
    double scale = 1.0;

    bool is_rotation() const {
        return kind == GateKind::RX || kind == GateKind::RY || kind == GateKind::RZ ||
               kind == GateKind::RZZ;
    }
    bool is_parametric() const { return form != AngleForm::Bound; }
    double resolve_angle(std::span<const double> params) const;
};

/// Ordered gate list over a fixed qubit count. Rotation conventions follow
/// R_P(theta) = exp(-i theta P / 2); CNOT/CZ/H are the textbook unitaries.
/// Parameter slots must be contiguous from 0; several gates may share a
/// slot (with individual scale factors).
class Circuit {
  public:
    Circuit() = default;
    explicit Circuit(int n_qubits) : n_qubits_(n_qubits) {}

    int n_qubits() const { return n_qubits_; }
    const std::vector<Gate>& gates() const { return gates_; }
    int param_count() const { return param_count_; }

    void h(int q);
    void rx(int q, double angle);
    void ry(int q, double angle);
    void rz(int q, double angle);
    void rx_param(int q, int slot, double scale = 1.0);
    void ry_param(int q, int slot, double scale = 1.0);
    void rz_param(int q, int slot, double scale = 1.0);
    void rz_pauli_product(int q, int slot, int slot2, double scale);
    void cnot(int control, int target);
    void cz(int a, int b);
    void rzz(int a, int b, double angle);
    void rzz_param(int a, int b, int slot, double scale);

    /// Appends another circuit's gates (same qubit count, slots kept as-is).
    void append(const Circuit& other);
    /// Copy with every parametric gate bound to its numeric angle.
    Circuit bound(std::span<const double> params) const;
    /// Throws if qubit indices are out of range or slots are not contiguous.
    void validate() const;

    nlohmann::json to_json() const;

  private:
    void push(Gate g);

    int n_qubits_ = 0;
    int param_count_ = 0;
    std::vector<Gate> gates_;
};

/// Applies the circuit in place. `params` length must equal param_count().
void apply_circuit_inplace(StateVector& state, const Circuit& c, std::span<const double> params);
StateVector apply_circuit(const StateVector& state, const Circuit& c,
                          std::span<const double> params);

/// Diagonal Hamiltonian stored as one energy per basis index.
struct EnergyTable {
    int n_qubits = 0;
    std::vector<double> energy;
};

/// <state| diag(e) |state> = sum_z |a_z|^2 e[z]
double expectation_diagonal(const StateVector& state, const EnergyTable& e);

/// Seeded computational-basis sampling; counts sum to `shots`.
std::map<std::string, std::uint64_t> sample(const StateVector& state, std::uint64_t shots,
                                            Rng& rng);

/// Value and gradient of <0|U(p)' diag(e) U(p)|0> with respect to the
/// parameter vector, computed by reverse (adjoint) sweep in O(gates * 2^n).
/// Only Scaled-form parametric gates are differentiable; a circuit holding
/// parametric PauliProduct gates must be bound first.
struct ExpectationGradient {
    double value = 0.0;
    std::vector<double> gradient;
};
ExpectationGradient expectation_with_gradient(const Circuit& c, std::span<const double> params,
                                              const EnergyTable& table);

/// Exact mean and variance of the energy distribution induced by `state`.
struct EnergyMoments {
    double mean = 0.0;
    double variance = 0.0;
    double fourth_central = 0.0;
};
EnergyMoments energy_moments(const StateVector& state, const EnergyTable& table);

enum class Entanglement { None, Linear, Circular, Full };

/// Data-encoding circuit family. `Simple` is one RY(x_q) per qubit, repeated
/// `reps` additional times with a CNOT chain between repetitions (reps = 0
/// means a single rotation layer and no entanglers). `Pauli` is the
/// Hadamard-plus-phase encoding with the listed Pauli terms, repeated
/// reps + 1 times; pair phases use (pi - x_i)(pi - x_j).
struct FeatureMapSpec {
    enum class Kind { Simple, Pauli };
    Kind kind = Kind::Simple;
    int n_features = 4;
    int reps = 0;
    Entanglement entanglement = Entanglement::None;
    std::vector<std::string> paulis = {"Z", "ZZ"};
};

/// Builds the encoding circuit; parameter slot i is feature component i.
Circuit build_feature_map(const FeatureMapSpec& spec);

/// |<0| U(x1)' U(x2) |0>|^2, symmetric in its arguments, in [0, 1].
double kernel_entry(std::span<const double> x1, std::span<const double> x2,
                    const FeatureMapSpec& fm);

std::vector<std::pair<int, int>> entanglement_pairs(Entanglement e, int n_qubits);

}  // namespace qbl
