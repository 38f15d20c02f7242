#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

#include "trex/common.hpp"
#include "trex/occurrence.hpp"
#include "trex/selector.hpp"

namespace trex {

/// Asymmetric squared loss: underestimating the label costs w times more.
struct LossSpec {
    double w = 1.1;

    void validate() const {
        if (!(w > 1.0)) throw ArgumentError("LossSpec: w must be > 1");
    }
};

inline double asym_loss(double pred, double label, const LossSpec& spec) {
    const double over = std::max(0.0, pred - label);
    const double under = std::max(0.0, label - pred);
    return over * over + spec.w * under * under;
}

/// d asym_loss / d pred; subgradient 0 at pred == label.
inline double asym_loss_grad(double pred, double label, const LossSpec& spec) {
    return 2.0 * std::max(0.0, pred - label) - 2.0 * spec.w * std::max(0.0, label - pred);
}

/// How occurrence rows are turned into network inputs: rows are zero-padded to
/// p_max and the (v, T, L) scalars are appended normalized.
struct FeaturizationMeta {
    int p_max = 1;
    double T_max_norm = 10.0;
};

struct TrainInfo {
    int epochs = 0;
    double lr = 0.0;
    std::uint64_t seed = 0;
};

/// Dense network with ReLU hidden layers and a sigmoid output, plus the
/// featurization metadata it was trained with.
struct MlpParams {
    std::vector<int> layer_dims;            // e.g. {p_max + 3, 128, 64, 32, 1}
    std::vector<Eigen::MatrixXd> weights;   // weights[l]: dims[l+1] x dims[l]
    std::vector<Eigen::VectorXd> biases;
    FeaturizationMeta meta;
    double loss_w = 1.1;
    TrainInfo info;

    int input_dim() const { return layer_dims.empty() ? 0 : layer_dims.front(); }
    int num_layers() const { return static_cast<int>(weights.size()); }

    void validate() const {
        if (layer_dims.size() < 2) throw ArgumentError("MlpParams: needs at least 2 layers");
        if (layer_dims.back() != 1) throw ArgumentError("MlpParams: output layer must have 1 unit");
        if (weights.size() + 1 != layer_dims.size() || biases.size() != weights.size())
            throw ArgumentError("MlpParams: inconsistent layer count");
        for (std::size_t l = 0; l < weights.size(); ++l) {
            if (weights[l].rows() != layer_dims[l + 1] || weights[l].cols() != layer_dims[l] ||
                biases[l].size() != layer_dims[l + 1])
                throw ArgumentError("MlpParams: layer " + std::to_string(l) + " has inconsistent dimensions");
            if (!weights[l].allFinite() || !biases[l].allFinite())
                throw ArgumentError("MlpParams: non-finite parameters");
        }
        if (meta.p_max < 1) throw ArgumentError("MlpParams: p_max must be >= 1");
        if (!(meta.T_max_norm > 0)) throw ArgumentError("MlpParams: T_max_norm must be > 0");
    }
};

/// He-style uniform fan-in initialization, seed-controlled; biases start at 0.
inline MlpParams make_mlp(const std::vector<int>& dims, std::uint64_t seed) {
    MlpParams params;
    params.layer_dims = dims;
    std::mt19937_64 rng(seed);
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
        const double limit = std::sqrt(6.0 / static_cast<double>(dims[l]));
        std::uniform_real_distribution<double> unif(-limit, limit);
        Eigen::MatrixXd W(dims[l + 1], dims[l]);
        for (int r = 0; r < W.rows(); ++r)
            for (int c = 0; c < W.cols(); ++c) W(r, c) = unif(rng);
        params.weights.push_back(std::move(W));
        params.biases.push_back(Eigen::VectorXd::Zero(dims[l + 1]));
    }
    params.validate();
    return params;
}

/// The estimator architecture: (p_max + 3) -> 128 -> 64 -> 32 -> 1.
inline MlpParams make_fdp_net(int p_max, double T_max_norm, double loss_w, std::uint64_t seed) {
    MlpParams params = make_mlp({p_max + 3, 128, 64, 32, 1}, seed);
    params.meta = FeaturizationMeta{p_max, T_max_norm};
    params.loss_w = loss_w;
    return params;
}

/// Input layout: [phi_row zero-padded to p_max, v, T / T_max_norm, L / p].
inline Eigen::VectorXd featurize(const Eigen::VectorXd& phi_row, double v, int T, int L,
                                 const FeaturizationMeta& meta) {
    const int p = static_cast<int>(phi_row.size());
    if (p < 1) throw ArgumentError("featurize: empty occurrence row");
    if (p > meta.p_max)
        throw DataError("featurize: p = " + std::to_string(p) + " exceeds the model's p_max = " +
                        std::to_string(meta.p_max));
    if (v < 0.5 || v >= 1.0) throw ArgumentError("featurize: v must lie in [0.5, 1)");
    if (T < 1) throw ArgumentError("featurize: T must be >= 1");
    Eigen::VectorXd x = Eigen::VectorXd::Zero(meta.p_max + 3);
    x.head(p) = phi_row;
    x[meta.p_max] = v;
    x[meta.p_max + 1] = static_cast<double>(T) / meta.T_max_norm;
    x[meta.p_max + 2] = static_cast<double>(L) / static_cast<double>(p);
    return x;
}

namespace detail {

// Sigmoid with the pre-activation clamped to +-30 so the output stays strictly
// inside (0, 1) in double precision.
inline double sigmoid_clamped(double z) {
    const double zc = std::clamp(z, -30.0, 30.0);
    return 1.0 / (1.0 + std::exp(-zc));
}

inline bool sigmoid_in_linear_region(double z) { return z > -30.0 && z < 30.0; }

}  // namespace detail

/// Batched forward pass; rows of X are examples. Returns predictions in (0, 1).
inline Eigen::VectorXd mlp_forward_batch(const MlpParams& params, const Eigen::MatrixXd& X) {
    if (X.cols() != params.input_dim())
        throw ArgumentError("mlp_forward_batch: feature length " + std::to_string(X.cols()) +
                            " does not match input dimension " + std::to_string(params.input_dim()));
    Eigen::MatrixXd a = X;
    const int H = params.num_layers() - 1;
    for (int l = 0; l < H; ++l) {
        a = ((a * params.weights[l].transpose()).rowwise() + params.biases[l].transpose())
                .cwiseMax(0.0);
    }
    Eigen::VectorXd z = a * params.weights[H].transpose().col(0);
    z.array() += params.biases[H][0];
    for (int i = 0; i < z.size(); ++i) z[i] = detail::sigmoid_clamped(z[i]);
    return z;
}

inline double mlp_forward(const MlpParams& params, const Eigen::VectorXd& features) {
    Eigen::MatrixXd X(1, features.size());
    X.row(0) = features.transpose();
    return mlp_forward_batch(params, X)[0];
}

/// Exact gradients of the mean asymmetric loss over a batch.
struct Gradients {
    std::vector<Eigen::MatrixXd> dW;
    std::vector<Eigen::VectorXd> db;
    double mean_loss = 0.0;
};

inline Gradients backprop(const MlpParams& params, const Eigen::MatrixXd& X,
                          const Eigen::VectorXd& labels, const LossSpec& spec) {
    spec.validate();
    const int B = static_cast<int>(X.rows());
    if (B < 1) throw ArgumentError("backprop: empty batch");
    if (labels.size() != B) throw ArgumentError("backprop: label count mismatch");
    if (X.cols() != params.input_dim()) throw ArgumentError("backprop: feature dimension mismatch");

    const int H = params.num_layers() - 1;  // hidden layers
    std::vector<Eigen::MatrixXd> act(H + 1);
    act[0] = X;
    for (int l = 0; l < H; ++l) {
        act[l + 1] = ((act[l] * params.weights[l].transpose()).rowwise() +
                      params.biases[l].transpose())
                         .cwiseMax(0.0);
    }
    Eigen::VectorXd z = act[H] * params.weights[H].transpose().col(0);
    z.array() += params.biases[H][0];

    Gradients grads;
    grads.dW.resize(params.num_layers());
    grads.db.resize(params.num_layers());

    Eigen::VectorXd delta_out(B);
    double loss_sum = 0.0;
    for (int i = 0; i < B; ++i) {
        const double pred = detail::sigmoid_clamped(z[i]);
        loss_sum += asym_loss(pred, labels[i], spec);
        const double dsig = detail::sigmoid_in_linear_region(z[i]) ? pred * (1.0 - pred) : 0.0;
        delta_out[i] = asym_loss_grad(pred, labels[i], spec) * dsig / static_cast<double>(B);
    }
    grads.mean_loss = loss_sum / static_cast<double>(B);

    grads.dW[H] = (delta_out.transpose() * act[H]);
    grads.db[H] = Eigen::VectorXd::Constant(1, delta_out.sum());

    Eigen::MatrixXd delta = delta_out * params.weights[H];  // B x dims[H]
    for (int l = H - 1; l >= 0; --l) {
        delta = delta.cwiseProduct((act[l + 1].array() > 0.0).cast<double>().matrix());
        grads.dW[l] = delta.transpose() * act[l];
        grads.db[l] = delta.colwise().sum().transpose();
        if (l > 0) delta = delta * params.weights[l];
    }
    return grads;
}

/// Adaptive-moment optimizer state, shaped like the parameters it updates.
struct OptimizerState {
    std::vector<Eigen::MatrixXd> mW, vW;
    std::vector<Eigen::VectorXd> mb, vb;
    long step = 0;
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

inline OptimizerState make_adam(const MlpParams& params, double lr) {
    OptimizerState st;
    st.lr = lr;
    for (int l = 0; l < params.num_layers(); ++l) {
        st.mW.push_back(Eigen::MatrixXd::Zero(params.weights[l].rows(), params.weights[l].cols()));
        st.vW.push_back(Eigen::MatrixXd::Zero(params.weights[l].rows(), params.weights[l].cols()));
        st.mb.push_back(Eigen::VectorXd::Zero(params.biases[l].size()));
        st.vb.push_back(Eigen::VectorXd::Zero(params.biases[l].size()));
    }
    return st;
}

inline void adam_step(MlpParams& params, const Gradients& grads, OptimizerState& st) {
    ++st.step;
    const double bc1 = 1.0 - std::pow(st.beta1, static_cast<double>(st.step));
    const double bc2 = 1.0 - std::pow(st.beta2, static_cast<double>(st.step));
    for (int l = 0; l < params.num_layers(); ++l) {
        st.mW[l] = st.beta1 * st.mW[l] + (1.0 - st.beta1) * grads.dW[l];
        st.vW[l] = st.beta2 * st.vW[l] + (1.0 - st.beta2) * grads.dW[l].cwiseProduct(grads.dW[l]);
        params.weights[l].array() -=
            st.lr * (st.mW[l].array() / bc1) / ((st.vW[l].array() / bc2).sqrt() + st.eps);
        st.mb[l] = st.beta1 * st.mb[l] + (1.0 - st.beta1) * grads.db[l];
        st.vb[l] = st.beta2 * st.vb[l] + (1.0 - st.beta2) * grads.db[l].cwiseProduct(grads.db[l]);
        params.biases[l].array() -=
            st.lr * (st.mb[l].array() / bc1) / ((st.vb[l].array() / bc2).sqrt() + st.eps);
    }
}

/// One featurized supervision record extracted from an occurrence table.
struct TrainingExample {
    double label = 0.0;  // true FDP in [0, 1]
    double v = 0.5;
    int T = 1;
    int L = 1;
    int p = 1;
    std::vector<double> phi;  // occurrence row at T, length p
    long system_index = -1;
};

inline Eigen::VectorXd featurize_example(const TrainingExample& ex, const FeaturizationMeta& meta) {
    Eigen::Map<const Eigen::VectorXd> row(ex.phi.data(), static_cast<long>(ex.phi.size()));
    return featurize(row, ex.v, ex.T, ex.L, meta);
}

/// Shuffled mini-batch training with the adaptive-moment optimizer. Returns
/// the trained parameters and the mean loss per epoch; pure in (inputs, seed).
inline std::pair<MlpParams, std::vector<double>> train(
    const std::vector<TrainingExample>& dataset, int epochs, double lr, int batch_size,
    const LossSpec& spec, std::uint64_t seed, const FeaturizationMeta& meta) {
    if (dataset.empty()) throw ArgumentError("train: empty dataset");
    if (epochs < 0) throw ArgumentError("train: epochs must be >= 0");
    if (batch_size < 1) throw ArgumentError("train: batch_size must be >= 1");
    spec.validate();

    MlpParams params = make_fdp_net(meta.p_max, meta.T_max_norm, spec.w, derive_seed(seed, 0x1417ull));
    params.info = TrainInfo{epochs, lr, seed};

    const long N = static_cast<long>(dataset.size());
    const int D = params.input_dim();
    Eigen::MatrixXd features(N, D);
    Eigen::VectorXd labels(N);
    for (long i = 0; i < N; ++i) {
        features.row(i) = featurize_example(dataset[i], meta).transpose();
        labels[i] = dataset[i].label;
    }

    OptimizerState opt = make_adam(params, lr);
    std::mt19937_64 rng(derive_seed(seed, 0x5ca1eull));
    std::vector<long> perm(N);
    std::iota(perm.begin(), perm.end(), 0L);

    std::vector<double> trace;
    trace.reserve(static_cast<std::size_t>(epochs));
    for (int epoch = 0; epoch < epochs; ++epoch) {
        std::shuffle(perm.begin(), perm.end(), rng);
        double loss_sum = 0.0;
        for (long start = 0; start < N; start += batch_size) {
            const long b = std::min<long>(batch_size, N - start);
            Eigen::MatrixXd Xb(b, D);
            Eigen::VectorXd yb(b);
            for (long i = 0; i < b; ++i) {
                Xb.row(i) = features.row(perm[start + i]);
                yb[i] = labels[perm[start + i]];
            }
            Gradients grads = backprop(params, Xb, yb, spec);
            adam_step(params, grads, opt);
            loss_sum += grads.mean_loss * static_cast<double>(b);
        }
        trace.push_back(loss_sum / static_cast<double>(N));
    }
    return {std::move(params), std::move(trace)};
}

/// Learned FDP estimate at one grid point: featurize row T of phi and run the
/// network. Drop-in replacement for the analytical estimator in calibration.
inline double predict_fdp(const MlpParams& params, const OccurrenceTable& table, double v, int T) {
    if (T < 1 || T > table.T_max) throw ArgumentError("predict_fdp: T out of range");
    const Eigen::VectorXd row = table.phi.row(T - 1).transpose();
    return mlp_forward(params, featurize(row, v, T, table.L, params.meta));
}

/// Owns a copy of the parameters, so the estimator stays valid on its own.
inline FdpEstimator learned_estimator(MlpParams params) {
    return [params = std::move(params)](const OccurrenceTable& t, double v, int T) {
        return predict_fdp(params, t, v, T);
    };
}

}  // namespace trex
