#pragma once

#include "forgetbench/core/error.hpp"
#include "forgetbench/core/rng.hpp"
#include "forgetbench/core/types.hpp"

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace forgetbench::nn {

using BoolVector = Eigen::Array<bool, Eigen::Dynamic, 1>;

// One affine map: weight is [fan_out x fan_in], bias is [fan_out].
struct DenseLayer {
    Matrix weight;
    Vector bias;

    Eigen::Index fan_in() const { return weight.cols(); }
    Eigen::Index fan_out() const { return weight.rows(); }
    std::size_t size() const { return static_cast<std::size_t>(weight.size() + bias.size()); }

    static DenseLayer zeros(Eigen::Index fan_out, Eigen::Index fan_in) {
        return {Matrix::Zero(fan_out, fan_in), Vector::Zero(fan_out)};
    }
    static DenseLayer zeros_like(const DenseLayer& other) {
        return zeros(other.fan_out(), other.fan_in());
    }
};

// true = trainable.
struct LayerMask {
    Mask weight;
    BoolVector bias;

    static LayerMask all(const DenseLayer& layer, bool trainable) {
        return {Mask::Constant(layer.fan_out(), layer.fan_in(), trainable),
                BoolVector::Constant(layer.fan_out(), trainable)};
    }
};

// A list of parameter blocks with the same shapes as some model's parameters.
// Used for gradients, optimizer moments, Fisher diagonals and anchors.
using ParamList = std::vector<DenseLayer>;

inline ParamList zeros_like(const ParamList& params) {
    ParamList out;
    out.reserve(params.size());
    for (const auto& layer : params) out.push_back(DenseLayer::zeros_like(layer));
    return out;
}

inline bool same_shapes(const ParamList& a, const ParamList& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i].weight.rows() != b[i].weight.rows() || a[i].weight.cols() != b[i].weight.cols() ||
            a[i].bias.size() != b[i].bias.size()) {
            return false;
        }
    }
    return true;
}

inline std::size_t parameter_count(const ParamList& params) {
    std::size_t n = 0;
    for (const auto& layer : params) n += layer.size();
    return n;
}

// Uniform in [-sqrt(6 / fan_in), sqrt(6 / fan_in)], biases zero.
inline DenseLayer he_uniform(Eigen::Index fan_out, Eigen::Index fan_in, Rng& rng) {
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in));
    std::uniform_real_distribution<double> dist(-limit, limit);
    DenseLayer layer = DenseLayer::zeros(fan_out, fan_in);
    for (Eigen::Index j = 0; j < layer.weight.cols(); ++j) {
        for (Eigen::Index i = 0; i < layer.weight.rows(); ++i) layer.weight(i, j) = dist(rng);
    }
    return layer;
}

// Layered weights of a feed-forward net plus a trainable mask of equal shape.
struct NetParams {
    ParamList layers;
    std::vector<LayerMask> masks;

    // sizes = {input, hidden..., output}
    static NetParams he_init(std::span<const int> sizes, Rng& rng) {
        if (sizes.size() < 2) throw ShapeError("a network needs at least an input and an output size");
        NetParams net;
        for (std::size_t k = 1; k < sizes.size(); ++k) {
            if (sizes[k - 1] <= 0 || sizes[k] <= 0) throw ShapeError("layer sizes must be positive");
            net.layers.push_back(he_uniform(sizes[k], sizes[k - 1], rng));
            net.masks.push_back(LayerMask::all(net.layers.back(), true));
        }
        return net;
    }

    static NetParams from_layers(ParamList layers) {
        NetParams net;
        net.layers = std::move(layers);
        for (const auto& layer : net.layers) net.masks.push_back(LayerMask::all(layer, true));
        net.validate();
        return net;
    }

    Eigen::Index input_size() const { return layers.front().fan_in(); }
    Eigen::Index output_size() const { return layers.back().fan_out(); }
    std::size_t parameter_count() const { return forgetbench::nn::parameter_count(layers); }

    void validate() const {
        if (layers.empty()) throw ShapeError("network has no layers");
        if (masks.size() != layers.size()) throw ShapeError("mask count differs from layer count");
        for (std::size_t k = 0; k < layers.size(); ++k) {
            const auto& layer = layers[k];
            if (layer.bias.size() != layer.fan_out()) {
                throw ShapeError("layer " + std::to_string(k) + ": bias length differs from fan_out");
            }
            if (k > 0 && layer.fan_in() != layers[k - 1].fan_out()) {
                throw ShapeError("layer " + std::to_string(k) + ": fan_in " + std::to_string(layer.fan_in()) +
                                 " does not match previous fan_out " +
                                 std::to_string(layers[k - 1].fan_out()));
            }
            if (masks[k].weight.rows() != layer.fan_out() || masks[k].weight.cols() != layer.fan_in() ||
                masks[k].bias.size() != layer.fan_out()) {
                throw ShapeError("layer " + std::to_string(k) + ": mask shape differs from parameters");
            }
        }
    }
};

}  // namespace forgetbench::nn
