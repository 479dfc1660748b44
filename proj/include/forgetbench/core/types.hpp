#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

namespace forgetbench {

// Rows are examples, columns are features.
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;
using Mask = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;
using Labels = std::vector<int>;

// Gathers the given rows of `x` into a new matrix.
inline Matrix take_rows(const Matrix& x, const std::vector<std::size_t>& rows) {
    Matrix out(static_cast<Eigen::Index>(rows.size()), x.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        out.row(static_cast<Eigen::Index>(i)) = x.row(static_cast<Eigen::Index>(rows[i]));
    }
    return out;
}

inline Labels take(const Labels& y, const std::vector<std::size_t>& rows) {
    Labels out;
    out.reserve(rows.size());
    for (auto r : rows) out.push_back(y[r]);
    return out;
}

}  // namespace forgetbench
