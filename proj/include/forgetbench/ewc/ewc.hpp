#pragma once

#include "forgetbench/core/rng.hpp"
#include "forgetbench/learner/mlp.hpp"
#include "forgetbench/nn/dense.hpp"
#include "forgetbench/nn/loss.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <vector>

namespace forgetbench::ewc {

// Parameters and Fisher diagonal captured after one session.
struct Anchor {
    nn::ParamList theta;
    nn::ParamList fisher;
    double lambda = 0.0;
};

struct EwcState {
    std::vector<Anchor> anchors;
};

struct FisherEstimate {
    nn::ParamList diagonal;
    int samples = 0;
    bool clamped = false;  // fewer examples than requested were available
};

// Diagonal of the Fisher information: the mean over `n_samples` examples of
// the squared gradient of log p(y | x), with y drawn from the model's own
// predictive distribution.
inline FisherEstimate estimate_fisher(const nn::NetParams& net, const Matrix& x, int n_samples, Rng& rng) {
    FisherEstimate out;
    out.diagonal = nn::zeros_like(net.layers);
    const auto available = static_cast<int>(x.rows());
    out.clamped = n_samples > available;
    out.samples = std::min(n_samples, available);
    if (out.samples <= 0) return out;

    std::vector<std::size_t> order(static_cast<std::size_t>(available));
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), rng);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    for (int s = 0; s < out.samples; ++s) {
        const Matrix row = x.row(static_cast<Eigen::Index>(order[static_cast<std::size_t>(s)]));
        auto pass = nn::forward(net, row);
        const Matrix p = nn::softmax(pass.logits);
        // Inverse-CDF draw from the predictive distribution.
        const double u = unit(rng);
        int y = static_cast<int>(p.cols()) - 1;
        double acc = 0.0;
        for (Eigen::Index c = 0; c < p.cols(); ++c) {
            acc += p(0, c);
            if (u < acc) {
                y = static_cast<int>(c);
                break;
            }
        }
        const auto lg = nn::softmax_xent_grad(pass.logits, Labels{y});
        const auto grads = nn::backward(net, pass.cache, lg.grad);
        for (std::size_t k = 0; k < grads.size(); ++k) {
            out.diagonal[k].weight.array() += grads[k].weight.array().square();
            out.diagonal[k].bias.array() += grads[k].bias.array().square();
        }
    }
    const double inv = 1.0 / out.samples;
    for (auto& layer : out.diagonal) {
        layer.weight *= inv;
        layer.bias *= inv;
    }
    return out;
}

// Sum over anchors of (lambda / 2) * F_i * (theta_i - anchor_i)^2. When
// `grads` is given, lambda * F_i * (theta_i - anchor_i) is added to it.
inline double penalty(const nn::ParamList& theta, const EwcState& state, nn::ParamList* grads = nullptr) {
    double total = 0.0;
    for (const auto& anchor : state.anchors) {
        if (!nn::same_shapes(theta, anchor.theta) || !nn::same_shapes(theta, anchor.fisher)) {
            throw ShapeError("EWC anchor shape differs from the network");
        }
        if (grads != nullptr && !nn::same_shapes(theta, *grads)) throw ShapeError("EWC gradient shape differs");
        for (std::size_t k = 0; k < theta.size(); ++k) {
            const auto dw = (theta[k].weight - anchor.theta[k].weight).array();
            const auto db = (theta[k].bias - anchor.theta[k].bias).array();
            total += 0.5 * anchor.lambda *
                     ((anchor.fisher[k].weight.array() * dw.square()).sum() + (anchor.fisher[k].bias.array() * db.square()).sum());
            if (grads != nullptr) {
                (*grads)[k].weight.array() += anchor.lambda * anchor.fisher[k].weight.array() * dw;
                (*grads)[k].bias.array() += anchor.lambda * anchor.fisher[k].bias.array() * db;
            }
        }
    }
    return total;
}

struct LossAndGrad {
    double loss = 0.0;
    nn::ParamList grads;
};

// Task cross-entropy on `batch` plus the anchor penalty.
inline LossAndGrad ewc_loss_grad(const nn::NetParams& net, const Matrix& x, const Labels& y, const EwcState& state) {
    auto pass = nn::forward(net, x);
    auto lg = nn::softmax_xent_grad(pass.logits, y);
    LossAndGrad out{lg.loss, nn::backward(net, pass.cache, lg.grad)};
    out.loss += penalty(net.layers, state, &out.grads);
    return out;
}

// Appends an anchor at the current parameters with a fresh Fisher estimate.
inline FisherEstimate consolidate(EwcState& state, const nn::NetParams& net, const Matrix& session_x, int n_samples,
                                  double lambda, Rng& rng) {
    auto fisher = estimate_fisher(net, session_x, n_samples, rng);
    state.anchors.push_back({net.layers, fisher.diagonal, lambda});
    return fisher;
}

// Collapses every anchor into one with the same penalty gradient:
// F = sum_a F_a and anchor = sum_a F_a * anchor_a / F (the latest anchor where
// F is zero). All anchors must share one lambda. The penalty value changes by
// a constant only.
inline EwcState merge_anchors(const EwcState& state) {
    if (state.anchors.size() <= 1) return state;
    const double lambda = state.anchors.front().lambda;
    for (const auto& a : state.anchors) {
        if (a.lambda != lambda) throw ConfigError("cannot merge EWC anchors with different lambda values");
    }
    Anchor merged{nn::zeros_like(state.anchors.front().theta), nn::zeros_like(state.anchors.front().theta), lambda};
    nn::ParamList weighted = nn::zeros_like(merged.theta);
    for (const auto& a : state.anchors) {
        for (std::size_t k = 0; k < a.theta.size(); ++k) {
            merged.fisher[k].weight += a.fisher[k].weight;
            merged.fisher[k].bias += a.fisher[k].bias;
            weighted[k].weight.array() += a.fisher[k].weight.array() * a.theta[k].weight.array();
            weighted[k].bias.array() += a.fisher[k].bias.array() * a.theta[k].bias.array();
        }
    }
    const auto& latest = state.anchors.back().theta;
    for (std::size_t k = 0; k < merged.theta.size(); ++k) {
        merged.theta[k].weight = (merged.fisher[k].weight.array() > 0.0)
                                     .select(weighted[k].weight.array() / merged.fisher[k].weight.array(),
                                             latest[k].weight.array())
                                     .matrix();
        merged.theta[k].bias = (merged.fisher[k].bias.array() > 0.0)
                                   .select(weighted[k].bias.array() / merged.fisher[k].bias.array(),
                                           latest[k].bias.array())
                                   .matrix();
    }
    return EwcState{{std::move(merged)}};
}

struct EwcConfig {
    MlpConfig mlp{{400, 400}, {nn::OptimizerKind::Adam, 2e-4}, {250, 100, 10, nn::StopMetric::ValidationAccuracy, 0}, 0.1};
    double lambda = 400.0;
    int fisher_samples = 1024;
    // Keep a single merged anchor instead of one per session.
    bool merge_anchors = true;
};

// MLP whose loss carries one quadratic anchor per completed session. Prior
// sessions' validation data is not retained.
class EwcLearner : public MlpLearner {
public:
    EwcLearner(LearnerShape shape, EwcConfig config, std::uint64_t seed)
        : MlpLearner(shape, config.mlp, seed), ewc_(config) {}

    std::string id() const override { return "ewc"; }

    // Each stored anchor holds two parameter-sized arrays. With merged
    // anchors the footprint is fixed from the start.
    MemoryLedger memory() const override {
        const std::size_t bytes = net_.parameter_count() * sizeof(double);
        const std::size_t anchors = ewc_.merge_anchors ? 1 : state_.anchors.size();
        return {bytes, 2 * bytes * anchors};
    }

    const EwcState& state() const { return state_; }
    const FisherEstimate& last_fisher() const { return last_fisher_; }

protected:
    double penalty(const nn::NetParams& net, nn::ParamList& grads) const override {
        return ewc::penalty(net.layers, state_, &grads);
    }

    void after_session(const data::StudySession& session) override {
        Rng rng = make_rng(seed_, "fisher-" + std::to_string(session.id));
        last_fisher_ = consolidate(state_, net_, session.train_x, ewc_.fisher_samples, ewc_.lambda, rng);
        if (ewc_.merge_anchors) state_ = merge_anchors(state_);
    }

private:
    EwcConfig ewc_;
    EwcState state_;
    FisherEstimate last_fisher_;
};

}  // namespace forgetbench::ewc
