#pragma once

#include "forgetbench/core/error.hpp"
#include "forgetbench/core/types.hpp"

#include <cmath>
#include <string>

namespace forgetbench::nn {

// Row-wise softmax, shifted by the row max for stability.
inline Matrix softmax(const Matrix& logits) {
    Matrix p = logits.colwise() - logits.rowwise().maxCoeff();
    p = p.array().exp().matrix();
    const Vector sums = p.rowwise().sum();
    for (Eigen::Index i = 0; i < p.rows(); ++i) p.row(i) /= sums(i);
    return p;
}

struct LossGrad {
    double loss = 0.0;
    Matrix grad;  // d loss / d logits
};

// Mean negative log-likelihood of the true class and its gradient.
inline LossGrad softmax_xent_grad(const Matrix& logits, const Labels& labels) {
    if (static_cast<Eigen::Index>(labels.size()) != logits.rows()) {
        throw ShapeError("label count " + std::to_string(labels.size()) + " differs from logit rows " +
                         std::to_string(logits.rows()));
    }
    const auto n = logits.rows();
    const auto classes = logits.cols();
    LossGrad out;
    out.grad = softmax(logits);
    const Vector row_max = logits.rowwise().maxCoeff();
    for (Eigen::Index i = 0; i < n; ++i) {
        const int y = labels[static_cast<std::size_t>(i)];
        if (y < 0 || y >= classes) {
            throw InputError("label " + std::to_string(y) + " at row " + std::to_string(i) +
                             " outside [0, " + std::to_string(classes) + ")");
        }
        const double log_z = row_max(i) + std::log((logits.row(i).array() - row_max(i)).exp().sum());
        out.loss += log_z - logits(i, y);
        out.grad(i, y) -= 1.0;
    }
    if (n > 0) {
        out.loss /= static_cast<double>(n);
        out.grad /= static_cast<double>(n);
    }
    return out;
}

}  // namespace forgetbench::nn
