#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "trex/common.hpp"
#include "trex/mlp.hpp"

namespace trex {

namespace detail {

inline constexpr char kModelMagic[8] = {'T', 'R', 'E', 'X', 'F', 'D', 'P', '\x01'};

template <typename T>
void write_pod(std::ostream& out, const T& value) {
    out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_pod(std::istream& in, const char* what) {
    T value;
    in.read(reinterpret_cast<char*>(&value), sizeof(T));
    if (!in) throw DataError(std::string("model file truncated or corrupt (") + what + ")");
    return value;
}

}  // namespace detail

/// Versioned binary container: header (format version, layer dims, p_max,
/// T_max_norm, loss weight, training metadata), then row-major weight
/// matrices and biases layer by layer. Round-trips bit-exactly.
inline void save_model(const MlpParams& params, const std::string& path) {
    params.validate();
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open model file for writing: " + path);
    out.write(detail::kModelMagic, sizeof(detail::kModelMagic));
    detail::write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(params.layer_dims.size()));
    for (int d : params.layer_dims) detail::write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(d));
    detail::write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(params.meta.p_max));
    detail::write_pod<double>(out, params.meta.T_max_norm);
    detail::write_pod<double>(out, params.loss_w);
    detail::write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(params.info.epochs));
    detail::write_pod<double>(out, params.info.lr);
    detail::write_pod<std::uint64_t>(out, params.info.seed);
    for (std::size_t l = 0; l < params.weights.size(); ++l) {
        const auto& W = params.weights[l];
        for (int r = 0; r < W.rows(); ++r)
            for (int c = 0; c < W.cols(); ++c) detail::write_pod<double>(out, W(r, c));
        const auto& b = params.biases[l];
        for (int i = 0; i < b.size(); ++i) detail::write_pod<double>(out, b[i]);
    }
    out.write(detail::kModelMagic, sizeof(detail::kModelMagic));
    if (!out) throw IoError("failed writing model file: " + path);
}

inline MlpParams load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open model file: " + path);
    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, detail::kModelMagic, 7) != 0)
        throw DataError("not a model file: " + path);
    if (magic[7] != detail::kModelMagic[7])
        throw DataError("unsupported model file version in " + path);

    MlpParams params;
    const auto n_dims = detail::read_pod<std::uint32_t>(in, "layer count");
    if (n_dims < 2 || n_dims > 64) throw DataError("model file has implausible layer count");
    for (std::uint32_t i = 0; i < n_dims; ++i) {
        const auto d = detail::read_pod<std::uint32_t>(in, "layer dims");
        if (d < 1 || d > 1u << 20) throw DataError("model file has implausible layer dimension");
        params.layer_dims.push_back(static_cast<int>(d));
    }
    params.meta.p_max = static_cast<int>(detail::read_pod<std::uint32_t>(in, "p_max"));
    params.meta.T_max_norm = detail::read_pod<double>(in, "T_max_norm");
    params.loss_w = detail::read_pod<double>(in, "loss weight");
    params.info.epochs = static_cast<int>(detail::read_pod<std::uint32_t>(in, "epochs"));
    params.info.lr = detail::read_pod<double>(in, "learning rate");
    params.info.seed = detail::read_pod<std::uint64_t>(in, "seed");
    for (std::size_t l = 0; l + 1 < params.layer_dims.size(); ++l) {
        Eigen::MatrixXd W(params.layer_dims[l + 1], params.layer_dims[l]);
        for (int r = 0; r < W.rows(); ++r)
            for (int c = 0; c < W.cols(); ++c) W(r, c) = detail::read_pod<double>(in, "weights");
        params.weights.push_back(std::move(W));
        Eigen::VectorXd b(params.layer_dims[l + 1]);
        for (int i = 0; i < b.size(); ++i) b[i] = detail::read_pod<double>(in, "biases");
        params.biases.push_back(std::move(b));
    }
    char footer[8];
    in.read(footer, sizeof(footer));
    if (!in || std::memcmp(footer, detail::kModelMagic, 8) != 0)
        throw DataError("model file truncated or corrupt (footer): " + path);
    in.peek();
    if (!in.eof()) throw DataError("model file has trailing bytes: " + path);
    try {
        params.validate();
    } catch (const ArgumentError& e) {
        throw DataError(std::string("model file is internally inconsistent: ") + e.what());
    }
    return params;
}

}  // namespace trex
