#pragma once

#include "forgetbench/core/error.hpp"
#include "forgetbench/nn/params.hpp"

#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>

namespace forgetbench::nn {

enum class OptimizerKind { SGD, Adam, Nadam };

inline std::string_view to_string(OptimizerKind kind) {
    switch (kind) {
        case OptimizerKind::SGD: return "sgd";
        case OptimizerKind::Adam: return "adam";
        case OptimizerKind::Nadam: return "nadam";
    }
    return "?";
}

inline OptimizerKind optimizer_kind_from_string(std::string_view name) {
    if (name == "sgd") return OptimizerKind::SGD;
    if (name == "adam") return OptimizerKind::Adam;
    if (name == "nadam") return OptimizerKind::Nadam;
    throw ConfigError("unknown optimizer '" + std::string(name) + "'");
}

struct OptimizerConfig {
    OptimizerKind kind = OptimizerKind::Adam;
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

// First-order optimizer over a list of parameter blocks. Masked-out entries
// are left bit-identical, moments included.
class Optimizer {
public:
    Optimizer(OptimizerConfig config, const ParamList& shape)
        : config_(config), first_(zeros_like(shape)), second_(zeros_like(shape)) {}

    const OptimizerConfig& config() const { return config_; }
    std::int64_t steps() const { return steps_; }
    const ParamList& first_moment() const { return first_; }
    const ParamList& second_moment() const { return second_; }

    void step(ParamList& params, const std::vector<LayerMask>& masks, const ParamList& grads) {
        if (!same_shapes(params, grads) || !same_shapes(params, first_) || masks.size() != params.size()) {
            throw ShapeError("optimizer step: parameter, gradient and mask shapes differ");
        }
        begin_step();
        for (std::size_t k = 0; k < params.size(); ++k) update_block(k, params[k], masks[k], grads[k]);
    }

    void step(NetParams& net, const ParamList& grads) { step(net.layers, net.masks, grads); }

    // Sparse use: call begin_step() once per update, then update_block() for
    // each block that received a gradient. Blocks not touched keep their
    // parameters and moments.
    void begin_step() { ++steps_; }

    void update_block(std::size_t k, DenseLayer& param, const LayerMask& mask, const DenseLayer& grad) {
        check_block(k, param, grad);
        update(param.weight, first_[k].weight, second_[k].weight, grad.weight, &mask.weight);
        update(param.bias, first_[k].bias, second_[k].bias, grad.bias, &mask.bias);
    }

    // Unmasked variant: every entry of the block is trainable.
    void update_block(std::size_t k, DenseLayer& param, const DenseLayer& grad) {
        check_block(k, param, grad);
        update(param.weight, first_[k].weight, second_[k].weight, grad.weight, static_cast<const Mask*>(nullptr));
        update(param.bias, first_[k].bias, second_[k].bias, grad.bias, static_cast<const BoolVector*>(nullptr));
    }

private:
    // Applies one update to `param`; entries where `mask` is false (when a
    // mask is given) keep their parameter and moment values.
    template <class Param, class Grad, class MaskT>
    void update(Param& param, Param& m, Param& v, const Grad& grad, const MaskT* mask) {
        if (mask != nullptr && (mask->rows() != param.rows() || mask->cols() != param.cols())) {
            throw ShapeError("optimizer step: mask shape differs from parameter");
        }
        const double lr = config_.learning_rate;
        if (config_.kind == OptimizerKind::SGD) {
            auto next = (param.array() - lr * grad.array()).eval();
            if (mask != nullptr) param = mask->select(next, param.array()).matrix();
            else param = next.matrix();
            return;
        }
        const double b1 = config_.beta1;
        const double b2 = config_.beta2;
        const double t = static_cast<double>(steps_);
        auto m_new = (b1 * m.array() + (1.0 - b1) * grad.array()).eval();
        auto v_new = (b2 * v.array() + (1.0 - b2) * grad.array().square()).eval();
        const double bias2 = 1.0 - std::pow(b2, t);
        auto denom = ((v_new / bias2).sqrt() + config_.epsilon).eval();
        decltype(m_new) direction;
        if (config_.kind == OptimizerKind::Adam) {
            direction = m_new / (1.0 - std::pow(b1, t));
        } else {
            // Nesterov look-ahead on the first moment.
            direction = b1 * m_new / (1.0 - std::pow(b1, t + 1.0)) + (1.0 - b1) * grad.array() / (1.0 - std::pow(b1, t));
        }
        auto next = (param.array() - lr * direction / denom).eval();
        if (mask != nullptr) {
            param = mask->select(next, param.array()).matrix();
            m = mask->select(m_new, m.array()).matrix();
            v = mask->select(v_new, v.array()).matrix();
        } else {
            param = next.matrix();
            m = m_new.matrix();
            v = v_new.matrix();
        }
    }

    void check_block(std::size_t k, const DenseLayer& param, const DenseLayer& grad) const {
        if (k >= first_.size()) throw ShapeError("optimizer step: block index out of range");
        if (param.weight.rows() != first_[k].weight.rows() || param.weight.cols() != first_[k].weight.cols() ||
            grad.weight.rows() != param.weight.rows() || grad.weight.cols() != param.weight.cols() ||
            grad.bias.size() != param.bias.size() || param.bias.size() != first_[k].bias.size()) {
            throw ShapeError("optimizer step: block " + std::to_string(k) + " shape differs");
        }
    }

    OptimizerConfig config_;
    ParamList first_;
    ParamList second_;
    std::int64_t steps_ = 0;
};

}  // namespace forgetbench::nn
