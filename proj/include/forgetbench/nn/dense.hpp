#pragma once

#include "forgetbench/nn/params.hpp"

#include <string>
#include <vector>

namespace forgetbench::nn {

// Activations kept by forward() for the backward pass.
struct ForwardCache {
    std::vector<Matrix> inputs;  // inputs[k] is the input of layer k
    std::vector<Matrix> pre;     // pre[k] is the pre-activation of hidden layer k
};

struct ForwardResult {
    Matrix logits;
    ForwardCache cache;
};

// Affine map applied to a batch: x * W^T + 1 b^T.
inline Matrix affine(const DenseLayer& layer, const Matrix& x) {
    Matrix z = x * layer.weight.transpose();
    z.rowwise() += layer.bias.transpose();
    return z;
}

inline Matrix relu(const Matrix& z) { return z.cwiseMax(0.0); }

// ReLU on every hidden layer, identity on the output layer.
inline ForwardResult forward(const NetParams& net, const Matrix& x) {
    ForwardResult out;
    Matrix h = x;
    for (std::size_t k = 0; k < net.layers.size(); ++k) {
        const auto& layer = net.layers[k];
        if (h.cols() != layer.fan_in()) {
            throw ShapeError("layer " + std::to_string(k) + ": expected " + std::to_string(layer.fan_in()) +
                             " input columns, got " + std::to_string(h.cols()));
        }
        out.cache.inputs.push_back(h);
        Matrix z = affine(layer, h);
        if (k + 1 < net.layers.size()) {
            h = relu(z);
            out.cache.pre.push_back(std::move(z));
        } else {
            out.logits = std::move(z);
        }
    }
    return out;
}

inline Matrix logits(const NetParams& net, const Matrix& x) { return forward(net, x).logits; }

// Gradient of one affine layer given the upstream gradient; returns the
// gradient with respect to the layer input through `grad_input`.
inline DenseLayer affine_backward(const DenseLayer& layer, const Matrix& input, const Matrix& grad_out,
                                  Matrix* grad_input) {
    DenseLayer g;
    g.weight = grad_out.transpose() * input;
    g.bias = grad_out.colwise().sum().transpose();
    if (grad_input != nullptr) *grad_input = grad_out * layer.weight;
    return g;
}

// Backpropagates d loss / d logits through the cached activations.
inline ParamList backward(const NetParams& net, const ForwardCache& cache, const Matrix& grad_logits) {
    const std::size_t depth = net.layers.size();
    if (cache.inputs.size() != depth) throw ShapeError("forward cache does not match the network depth");
    if (grad_logits.cols() != net.output_size() || grad_logits.rows() != cache.inputs.front().rows()) {
        throw ShapeError("logit gradient shape does not match the forward pass");
    }
    ParamList grads(depth);
    Matrix upstream = grad_logits;
    for (std::size_t k = depth; k-- > 0;) {
        Matrix grad_input;
        grads[k] = affine_backward(net.layers[k], cache.inputs[k], upstream, k > 0 ? &grad_input : nullptr);
        if (k > 0) {
            upstream = (cache.pre[k - 1].array() > 0.0).select(grad_input, 0.0);
        }
    }
    return grads;
}

// Index of the largest entry in each row; ties go to the lowest index.
inline Labels argmax_rows(const Matrix& scores) {
    Labels out(static_cast<std::size_t>(scores.rows()));
    for (Eigen::Index i = 0; i < scores.rows(); ++i) {
        Eigen::Index best = 0;
        for (Eigen::Index j = 1; j < scores.cols(); ++j) {
            if (scores(i, j) > scores(i, best)) best = j;
        }
        out[static_cast<std::size_t>(i)] = static_cast<int>(best);
    }
    return out;
}

// argmax restricted to columns flagged in `allowed`.
inline Labels argmax_rows(const Matrix& scores, const std::vector<bool>& allowed) {
    Labels out(static_cast<std::size_t>(scores.rows()), -1);
    for (Eigen::Index i = 0; i < scores.rows(); ++i) {
        Eigen::Index best = -1;
        for (Eigen::Index j = 0; j < scores.cols(); ++j) {
            if (!allowed[static_cast<std::size_t>(j)]) continue;
            if (best < 0 || scores(i, j) > scores(i, best)) best = j;
        }
        out[static_cast<std::size_t>(i)] = static_cast<int>(best);
    }
    return out;
}

}  // namespace forgetbench::nn
