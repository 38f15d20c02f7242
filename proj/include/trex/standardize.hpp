#pragma once

#include <Eigen/Dense>
#include <string>

#include "trex/common.hpp"

namespace trex {

/// Design and response prepared for forward selection: columns centered and
/// scaled to unit Euclidean norm, response centered.
struct StandardizedData {
    Eigen::MatrixXd Xs;
    Eigen::VectorXd ys;
    Eigen::VectorXd scale;  // per-column norm of the centered original column
    int p = 0;
};

/// Centers and norm-scales the columns of M in place. `what` names the matrix
/// in the degenerate-column error message.
inline Eigen::VectorXd standardize_columns_inplace(Eigen::MatrixXd& M, const std::string& what) {
    const int n = static_cast<int>(M.rows());
    if (n < 2) throw ArgumentError("standardize: needs at least 2 rows");
    Eigen::VectorXd scale(M.cols());
    for (int j = 0; j < M.cols(); ++j) {
        M.col(j).array() -= M.col(j).mean();
        const double nrm = M.col(j).norm();
        if (nrm <= 0.0)
            throw DataError(what + " column " + std::to_string(j) + " is constant");
        M.col(j) /= nrm;
        scale[j] = nrm;
    }
    return scale;
}

inline StandardizedData standardize(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
    if (X.rows() != y.size()) throw ArgumentError("standardize: X and y row counts differ");
    StandardizedData out;
    out.Xs = X;
    out.scale = standardize_columns_inplace(out.Xs, "design");
    out.ys = y.array() - y.mean();
    out.p = static_cast<int>(X.cols());
    return out;
}

}  // namespace trex
