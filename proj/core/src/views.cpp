#include "qbl/views.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

#include "qbl/parallel.hpp"
#include "qbl/rng.hpp"

namespace qbl {

LabelSeries label_series(const std::vector<double>& r, int t) {
    const int len = static_cast<int>(r.size());
    if (t < 1) throw DimensionMismatch("label_series: t must be >= 1");
    if (len <= t)
        throw InsufficientHistory("label_series: need more than t=" + std::to_string(t) +
                                  " returns, got " + std::to_string(len));
    double mean = 0.0;
    for (double v : r) mean += v;
    mean /= static_cast<double>(len);
    double var = 0.0;
    for (double v : r) var += (v - mean) * (v - mean);
    var /= static_cast<double>(len - 1);
    const double sigma_prime = std::sqrt(var) / std::sqrt(static_cast<double>(t));

    LabelSeries out;
    const int labeled = len - t;  // date d is followed by returns d+1 .. d+t
    out.y1.resize(labeled);
    out.y2.resize(labeled);
    for (int d = 0; d < labeled; ++d) {
        double future = 0.0;
        for (int k = 1; k <= t; ++k) future += r[d + k];
        future /= static_cast<double>(t);
        out.y1[d] = future >= 0.0 ? 1 : -1;
        if (sigma_prime > 0.0)
            out.y2[d] = std::abs(future) / sigma_prime >= 1.0 ? 2 : 1;
        else
            out.y2[d] = 2;
    }
    return out;
}

double kernel_value(const KernelSpec& kernel, std::span<const double> a,
                    std::span<const double> b) {
    if (const auto* rbf = std::get_if<RbfKernel>(&kernel)) {
        if (a.size() != b.size()) throw DimensionMismatch("kernel_value: size mismatch");
        double d2 = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) d2 += (a[i] - b[i]) * (a[i] - b[i]);
        return std::exp(-rbf->gamma * d2);
    }
    return kernel_entry(a, b, std::get<QuantumKernel>(kernel).feature_map);
}

SymMatrix compute_gram(const KernelSpec& kernel, const std::vector<std::vector<double>>& points,
                       int workers) {
    const int n = static_cast<int>(points.size());
    SymMatrix gram(std::max(n, 1));
    if (n == 0) return gram;

    if (const auto* quantum = std::get_if<QuantumKernel>(&kernel)) {
        const Circuit fm = build_feature_map(quantum->feature_map);
        std::vector<StateVector> embedded(n, StateVector(fm.n_qubits()));
        parallel_for(n, workers, [&](std::size_t i) {
            apply_circuit_inplace(embedded[i], fm, points[i]);
        });
        parallel_for(n, workers, [&](std::size_t i) {
            for (int j = static_cast<int>(i); j < n; ++j) {
                Amplitude overlap(0.0, 0.0);
                for (std::size_t z = 0; z < embedded[i].size(); ++z)
                    overlap += std::conj(embedded[i][z]) * embedded[j][z];
                gram.set(static_cast<int>(i), j, std::clamp(std::norm(overlap), 0.0, 1.0));
            }
        });
        return gram;
    }
    parallel_for(n, workers, [&](std::size_t i) {
        for (int j = static_cast<int>(i); j < n; ++j)
            gram.set(static_cast<int>(i), j, kernel_value(kernel, points[i], points[j]));
    });
    return gram;
}

namespace {

std::vector<int> binary_labels(const LabeledDataset& d, ViewTarget target) {
    std::vector<int> y(d.features.size());
    for (std::size_t i = 0; i < y.size(); ++i)
        y[i] = target == ViewTarget::Y1 ? d.y1[i] : (d.y2[i] == 2 ? 1 : -1);
    return y;
}

int encode_prediction(int sign, ViewTarget target) {
    if (target == ViewTarget::Y1) return sign;
    return sign > 0 ? 2 : 1;
}

/// Deterministic SMO: outer loop scans KKT violators in index order, the
/// partner is chosen by the max |E_i - E_j| heuristic with index tie-break.
struct SmoResult {
    std::vector<double> alpha;
    double bias = 0.0;
};

SmoResult smo_train(const SymMatrix& gram, const std::vector<int>& y, const SvmConfig& cfg) {
    const int n = static_cast<int>(y.size());
    SmoResult r;
    r.alpha.assign(n, 0.0);
    std::vector<double> error(n);
    for (int i = 0; i < n; ++i) error[i] = -static_cast<double>(y[i]);  // f = 0 initially

    auto update_errors = [&](int a, int b, double da, double db, double dbias) {
        for (int k = 0; k < n; ++k)
            error[k] += da * y[a] * gram(a, k) + db * y[b] * gram(b, k) + dbias;
    };

    const double c_box = cfg.c;
    const double tol = cfg.kkt_tol;

    // One pairwise step on (i, j); false when it cannot make progress.
    auto try_step = [&](int i, int j) {
        const double eta = 2.0 * gram(i, j) - gram(i, i) - gram(j, j);
        if (eta >= 0.0) return false;

        double lo, hi;
        if (y[i] != y[j]) {
            lo = std::max(0.0, r.alpha[j] - r.alpha[i]);
            hi = std::min(c_box, c_box + r.alpha[j] - r.alpha[i]);
        } else {
            lo = std::max(0.0, r.alpha[i] + r.alpha[j] - c_box);
            hi = std::min(c_box, r.alpha[i] + r.alpha[j]);
        }
        if (lo >= hi) return false;

        const double alpha_j_old = r.alpha[j];
        const double alpha_i_old = r.alpha[i];
        double aj = alpha_j_old - y[j] * (error[i] - error[j]) / eta;
        aj = std::clamp(aj, lo, hi);
        if (std::abs(aj - alpha_j_old) < 1e-7) return false;
        const double ai = alpha_i_old + y[i] * y[j] * (alpha_j_old - aj);

        const double b1 = r.bias - error[i] - y[i] * (ai - alpha_i_old) * gram(i, i) -
                          y[j] * (aj - alpha_j_old) * gram(i, j);
        const double b2 = r.bias - error[j] - y[i] * (ai - alpha_i_old) * gram(i, j) -
                          y[j] * (aj - alpha_j_old) * gram(j, j);
        double new_bias;
        if (ai > 0.0 && ai < c_box)
            new_bias = b1;
        else if (aj > 0.0 && aj < c_box)
            new_bias = b2;
        else
            new_bias = 0.5 * (b1 + b2);

        r.alpha[i] = ai;
        r.alpha[j] = aj;
        update_errors(i, j, ai - alpha_i_old, aj - alpha_j_old, new_bias - r.bias);
        r.bias = new_bias;
        return true;
    };

    for (int pass = 0; pass < cfg.max_passes; ++pass) {
        int changed = 0;
        for (int i = 0; i < n; ++i) {
            const double yi_ei = y[i] * error[i];
            const bool violates = (yi_ei < -tol && r.alpha[i] < c_box) ||
                                  (yi_ei > tol && r.alpha[i] > 0.0);
            if (!violates) continue;

            // Second-choice heuristic, then a deterministic fallback scan.
            int j = -1;
            double best_gap = -1.0;
            for (int k = 0; k < n; ++k) {
                if (k == i) continue;
                const double gap = std::abs(error[i] - error[k]);
                if (gap > best_gap) { best_gap = gap; j = k; }
            }
            bool stepped = j >= 0 && try_step(i, j);
            for (int off = 1; !stepped && off < n; ++off) {
                const int k = (i + off) % n;
                if (k != i && k != j) stepped = try_step(i, k);
            }
            if (stepped) ++changed;
        }
        if (changed == 0) break;
    }
    return r;
}

}  // namespace

double TrainedClassifier::decision_value(std::span<const double> x) const {
    if (kind == "qnn") {
        return qnn_parity_probability(qnn_feature_map, qnn_ansatz, qnn_params, x) - 0.5;
    }
    double acc = bias;
    for (std::size_t i = 0; i < support_points.size(); ++i)
        acc += coef[i] * kernel_value(kernel, support_points[i], x);
    return acc;
}

int TrainedClassifier::predict(std::span<const double> x) const {
    const int sign = decision_value(x) >= 0.0 ? 1 : -1;
    return encode_prediction(sign, target);
}

TrainedClassifier train_kernel_svm(const LabeledDataset& d, ViewTarget target,
                                   const KernelSpec& kernel, const SvmConfig& cfg) {
    if (d.train_idx.empty()) throw InsufficientData("train_kernel_svm: empty training split");
    const std::vector<int> all_y = binary_labels(d, target);

    std::vector<std::vector<double>> train_x;
    std::vector<int> train_y;
    train_x.reserve(d.train_idx.size());
    for (int idx : d.train_idx) {
        train_x.push_back(d.features[idx]);
        train_y.push_back(all_y[idx]);
    }
    const bool has_pos = std::find(train_y.begin(), train_y.end(), 1) != train_y.end();
    const bool has_neg = std::find(train_y.begin(), train_y.end(), -1) != train_y.end();
    if (!has_pos || !has_neg)
        throw SingleClassTraining("train_kernel_svm: training split has a single class");

    const SymMatrix gram = compute_gram(kernel, train_x, cfg.workers);
    const SmoResult smo = smo_train(gram, train_y, cfg);

    TrainedClassifier model;
    model.kind = std::holds_alternative<QuantumKernel>(kernel) ? "qsvm" : "svm_rbf";
    model.target = target;
    model.kernel = kernel;
    for (std::size_t i = 0; i < train_x.size(); ++i) {
        if (smo.alpha[i] <= 0.0) continue;
        model.support_points.push_back(train_x[i]);
        model.coef.push_back(smo.alpha[i] * train_y[i]);
    }
    model.bias = smo.bias;

    if (!d.test_idx.empty()) {
        int correct = 0;
        for (int idx : d.test_idx) {
            const int truth = target == ViewTarget::Y1 ? d.y1[idx] : d.y2[idx];
            if (model.predict(d.features[idx]) == truth) ++correct;
        }
        model.test_accuracy = static_cast<double>(correct) / static_cast<double>(d.test_idx.size());
    }
    return model;
}

Circuit build_qnn_ansatz(int n_qubits, int reps) {
    if (n_qubits < 1 || reps < 1) throw DimensionMismatch("qnn ansatz: need n >= 1, reps >= 1");
    Circuit c(n_qubits);
    int slot = 0;
    auto rotation_layer = [&] {
        for (int q = 0; q < n_qubits; ++q) c.ry_param(q, slot++);
    };
    for (int rep = 0; rep < reps; ++rep) {
        rotation_layer();
        for (int i = 0; i < n_qubits; ++i)
            for (int j = i + 1; j < n_qubits; ++j) c.cnot(i, j);
    }
    rotation_layer();
    c.validate();
    return c;
}

double qnn_parity_probability(const FeatureMapSpec& fm, const Circuit& ansatz,
                              std::span<const double> params, std::span<const double> x) {
    const Circuit embedding = build_feature_map(fm).bound(x);
    StateVector psi(embedding.n_qubits());
    apply_circuit_inplace(psi, embedding, {});
    apply_circuit_inplace(psi, ansatz, params);
    double p1 = 0.0;
    for (std::size_t z = 0; z < psi.size(); ++z)
        if (std::popcount(z) & 1) p1 += psi.probability(z);
    return p1;
}

TrainedClassifier train_qnn(const LabeledDataset& d, ViewTarget target, const FeatureMapSpec& fm,
                            const QnnConfig& cfg) {
    if (cfg.reps < 1) throw DimensionMismatch("train_qnn: reps must be >= 1");
    if (d.train_idx.empty()) throw InsufficientData("train_qnn: empty training split");
    const std::vector<int> all_y = binary_labels(d, target);
    const Circuit ansatz = build_qnn_ansatz(fm.n_features, cfg.reps);

    // Embed every training point once; the loss only re-runs the ansatz.
    const Circuit fm_circuit = build_feature_map(fm);
    std::vector<StateVector> embedded;
    std::vector<double> targets;  // parity-1 target in {0, 1}
    embedded.reserve(d.train_idx.size());
    for (int idx : d.train_idx) {
        StateVector psi(fm_circuit.n_qubits());
        apply_circuit_inplace(psi, fm_circuit, d.features[idx]);
        embedded.push_back(std::move(psi));
        targets.push_back(all_y[idx] > 0 ? 1.0 : 0.0);
    }

    const auto loss = [&](std::span<const double> params) {
        double acc = 0.0;
        for (std::size_t i = 0; i < embedded.size(); ++i) {
            StateVector psi = embedded[i];
            apply_circuit_inplace(psi, ansatz, params);
            double p1 = 0.0;
            for (std::size_t z = 0; z < psi.size(); ++z)
                if (std::popcount(z) & 1) p1 += psi.probability(z);
            const double diff = p1 - targets[i];
            acc += diff * diff;
        }
        return acc / static_cast<double>(embedded.size());
    };

    Rng rng(cfg.seed);
    std::vector<double> x0(ansatz.param_count());
    for (double& v : x0) v = rng.uniform(0.0, 2.0 * 3.141592653589793238462643383279502884);
    const MinimizeResult res = minimize_local(loss, std::move(x0), cfg.optimizer);

    TrainedClassifier model;
    model.kind = "qnn";
    model.target = target;
    model.qnn_feature_map = fm;
    model.qnn_ansatz = ansatz;
    model.qnn_params = res.x;

    if (!d.test_idx.empty()) {
        int correct = 0;
        for (int idx : d.test_idx) {
            const int truth = target == ViewTarget::Y1 ? d.y1[idx] : d.y2[idx];
            if (model.predict(d.features[idx]) == truth) ++correct;
        }
        model.test_accuracy = static_cast<double>(correct) / static_cast<double>(d.test_idx.size());
    }
    return model;
}

double build_eta(int y1, int y2, double s1, double s2) {
    if (y1 != 1 && y1 != -1) throw DimensionMismatch("build_eta: y1 must be +-1");
    if (y2 != 1 && y2 != 2) throw DimensionMismatch("build_eta: y2 must be 1 or 2");
    if (s1 < 0.0 || s1 > 1.0 || s2 < 0.0 || s2 > 1.0)
        throw InvalidProbability("build_eta: accuracies must be in [0, 1]");
    return s1 * s2 * static_cast<double>(y1) * static_cast<double>(y2);
}

ViewSet build_views(const std::vector<double>& eta, const std::vector<double>& pi,
                    const SymMatrix& sigma, double tau) {
    const int n = sigma.dim();
    if (static_cast<int>(eta.size()) != n || static_cast<int>(pi.size()) != n)
        throw DimensionMismatch("build_views: dimension mismatch");
    if (!(tau > 0.0)) throw NonPositiveVariance("build_views: tau must be > 0");
    ViewSet v;
    v.tau = tau;
    v.eta = eta;
    v.q.resize(n);
    v.omega.resize(n);
    for (int k = 0; k < n; ++k) {
        const double var_k = sigma(k, k);
        if (!(var_k > 0.0))
            throw NonPositiveVariance("build_views: Sigma_kk must be > 0 at k=" +
                                      std::to_string(k));
        v.omega[k] = tau * var_k;
        v.q[k] = pi[k] + eta[k] * std::sqrt(var_k);
    }
    return v;
}

nlohmann::json TrainedClassifier::to_json() const {
    nlohmann::json j;
    j["kind"] = kind;
    j["target"] = target == ViewTarget::Y1 ? "y1" : "y2";
    j["test_accuracy"] = test_accuracy;
    if (kind == "qnn") {
        j["params"] = qnn_params;
        j["reps_circuit"] = qnn_ansatz.to_json();
    } else {
        if (const auto* rbf = std::get_if<RbfKernel>(&kernel)) {
            j["kernel"] = {{"kind", "rbf"}, {"gamma", rbf->gamma}};
        } else {
            const auto& q = std::get<QuantumKernel>(kernel);
            j["kernel"] = {{"kind", "quantum"},
                           {"feature_map",
                            {{"kind", q.feature_map.kind == FeatureMapSpec::Kind::Simple
                                          ? "simple"
                                          : "pauli"},
                             {"n_features", q.feature_map.n_features},
                             {"reps", q.feature_map.reps}}}};
        }
        j["support"] = support_points;
        j["coef"] = coef;
        j["bias"] = bias;
    }
    return j;
}

}  // namespace qbl
