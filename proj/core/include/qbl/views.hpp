#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "qbl/blmodel.hpp"
#include "qbl/numerics.hpp"
#include "qbl/simulator.hpp"

namespace qbl {

/// View-classifier training data. y1 in {-1, +1} is the sign view, y2 in
/// {1, 2} the strength view; split indices refer to rows of `features`.
struct LabeledDataset {
    std::vector<std::vector<double>> features;  ///< components in (0, 2pi]
    std::vector<int> y1;
    std::vector<int> y2;
    std::vector<int> train_idx;
    std::vector<int> test_idx;
};

enum class ViewTarget { Y1, Y2 };

struct LabelSeries {
    std::vector<int> y1;  ///< one label per date that has t future returns
    std::vector<int> y2;
};

/// Labels date d from the mean r̄ of the t returns after d:
///   y1 = +1 if r̄ >= 0 else -1
///   y2 = 2 if |r̄| / (sigma / sqrt(t)) >= 1 else 1
/// sigma is the standard deviation of the whole passed return series.
LabelSeries label_series(const std::vector<double>& weekly_log_returns, int t = 52);

struct RbfKernel {
    double gamma = 1.0;
};
struct QuantumKernel {
    FeatureMapSpec feature_map;
};
using KernelSpec = std::variant<QuantumKernel, RbfKernel>;

double kernel_value(const KernelSpec& kernel, std::span<const double> a,
                    std::span<const double> b);

/// Gram matrix of the points under the kernel. Quantum kernels embed every
/// point once and take pairwise overlaps.
SymMatrix compute_gram(const KernelSpec& kernel, const std::vector<std::vector<double>>& points,
                       int workers = 1);

/// Soft-margin SVM trained by SMO-style pairwise updates (deterministic
/// second-choice heuristic, no randomness) to KKT tolerance 1e-3.
struct TrainedClassifier {
    std::string kind;  ///< "qsvm", "svm_rbf" or "qnn"
    ViewTarget target = ViewTarget::Y1;
    KernelSpec kernel = RbfKernel{};
    std::vector<std::vector<double>> support_points;
    std::vector<double> coef;  ///< alpha_i * y_i per support point
    double bias = 0.0;
    double test_accuracy = 0.0;
    // QNN-only state
    Circuit qnn_ansatz;
    std::vector<double> qnn_params;
    FeatureMapSpec qnn_feature_map;

    /// Decision in {-1, +1} (exactly-zero decision values predict +1),
    /// mapped back to {1, 2} for Y2.
    int predict(std::span<const double> x) const;
    double decision_value(std::span<const double> x) const;

    nlohmann::json to_json() const;
};

struct SvmConfig {
    double c = 1.0;          ///< box constraint
    double kkt_tol = 1e-3;
    int max_passes = 100000;
    int workers = 1;
};

TrainedClassifier train_kernel_svm(const LabeledDataset& d, ViewTarget target,
                                   const KernelSpec& kernel, const SvmConfig& cfg = {});

/// QNN: feature map, then m repetitions of [RY per qubit + fully connected
/// CNOTs], then a final RY layer — N(m+1) trainable parameters. The class
/// probability is the exact parity-1 probability of the output state, and
/// the mean squared loss against {0,1} labels is minimized with
/// minimize_local (central differences).
struct QnnConfig {
    int reps = 2;  ///< m
    std::uint64_t seed = 0;
    MinimizeConfig optimizer{.max_iters = 200, .f_tol = 1e-7};
};
TrainedClassifier train_qnn(const LabeledDataset& d, ViewTarget target, const FeatureMapSpec& fm,
                            const QnnConfig& cfg = {});

/// Parity-1 probability of the QNN output state for one input.
double qnn_parity_probability(const FeatureMapSpec& fm, const Circuit& ansatz,
                              std::span<const double> params, std::span<const double> x);

Circuit build_qnn_ansatz(int n_qubits, int reps);

/// eta = s1 * s2 * y1 * y2 in [-2, 2].
double build_eta(int y1, int y2, double s1, double s2);

/// P = identity, Omega_kk = tau * Sigma_kk, Q_k = Pi_k + eta_k sqrt(Sigma_kk).
ViewSet build_views(const std::vector<double>& eta, const std::vector<double>& pi,
                    const SymMatrix& sigma, double tau);

}  // namespace qbl
