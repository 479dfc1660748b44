#pragma once

#include "forgetbench/core/error.hpp"
#include "forgetbench/core/rng.hpp"
#include "forgetbench/data/dataset.hpp"
#include "forgetbench/learner/accuracy.hpp"
#include "forgetbench/learner/learner.hpp"
#include "forgetbench/nn/dense.hpp"
#include "forgetbench/nn/loss.hpp"
#include "forgetbench/nn/optimizer.hpp"
#include "forgetbench/nn/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>
#include <vector>

namespace forgetbench::fel {

struct FelConfig {
    int hidden = 400;
    int fel_units = 1200;
    int fan_in = 10;
    double excitatory_fraction = 0.5;
    int winners = 0;  // 0: ceil(2% of fel_units)

    int k() const { return winners > 0 ? winners : static_cast<int>(std::ceil(0.02 * fel_units)); }

    void validate() const {
        if (hidden < 1 || fel_units < 1) throw ConfigError("FEL layer sizes must be positive");
        if (fan_in < 1 || fan_in > hidden) throw ConfigError("FEL fan-in must lie in [1, hidden units]");
        if (excitatory_fraction < 0.0 || excitatory_fraction > 1.0) throw ConfigError("excitatory fraction must lie in [0, 1]");
        if (k() < 1 || k() > fel_units) throw ConfigError("FEL winners must lie in [1, FEL units]");
    }
};

// [fel_units x hidden] matrix with exactly fan_in nonzeros per row. The first
// round(fan_in * excitatory_fraction) connections of each unit are positive,
// the rest negative; magnitudes are uniform in (0, 1].
inline Matrix build_fel_weights(const FelConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    Rng rng = make_rng(seed, "fel-weights");
    std::uniform_real_distribution<double> mag(0.0, 1.0);
    const int positive = static_cast<int>(std::lround(cfg.fan_in * cfg.excitatory_fraction));
    Matrix w = Matrix::Zero(cfg.fel_units, cfg.hidden);
    std::vector<int> cols(static_cast<std::size_t>(cfg.hidden));
    for (int r = 0; r < cfg.fel_units; ++r) {
        std::iota(cols.begin(), cols.end(), 0);
        // Partial Fisher-Yates: the first fan_in slots become the inputs.
        for (int j = 0; j < cfg.fan_in; ++j) {
            std::uniform_int_distribution<int> pick(j, cfg.hidden - 1);
            std::swap(cols[static_cast<std::size_t>(j)], cols[static_cast<std::size_t>(pick(rng))]);
            const double m = 1.0 - mag(rng);  // (0, 1]
            w(r, cols[static_cast<std::size_t>(j)]) = j < positive ? m : -m;
        }
    }
    return w;
}

// Per row, true for the k largest entries; ties go to the lower index.
inline Mask top_k_mask(const Matrix& pre, int k) {
    if (k < 1 || k > pre.cols()) throw ConfigError("top-k needs 1 <= k <= " + std::to_string(pre.cols()));
    Mask mask = Mask::Constant(pre.rows(), pre.cols(), false);
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(pre.cols()));
    for (Eigen::Index i = 0; i < pre.rows(); ++i) {
        std::iota(idx.begin(), idx.end(), Eigen::Index{0});
        auto better = [&](Eigen::Index a, Eigen::Index b) {
            return pre(i, a) > pre(i, b) || (pre(i, a) == pre(i, b) && a < b);
        };
        std::nth_element(idx.begin(), idx.begin() + (k - 1), idx.end(), better);
        for (int j = 0; j < k; ++j) mask(i, idx[static_cast<std::size_t>(j)]) = true;
    }
    return mask;
}

struct FelNet {
    nn::DenseLayer hidden;      // d -> H
    Matrix fel;                 // [F x H], fixed, no bias
    nn::DenseLayer classifier;  // F -> C
    int k = 1;

    static FelNet create(int input_dim, int num_classes, const FelConfig& cfg, std::uint64_t seed) {
        cfg.validate();
        Rng rng = make_rng(seed, "init");
        FelNet net;
        net.hidden = nn::he_uniform(cfg.hidden, input_dim, rng);
        net.fel = build_fel_weights(cfg, seed);
        net.classifier = nn::he_uniform(num_classes, cfg.fel_units, rng);
        net.k = cfg.k();
        return net;
    }

    std::size_t parameter_count() const {
        return hidden.size() + static_cast<std::size_t>(fel.size()) + classifier.size();
    }
};

struct FelCache {
    Matrix input;
    Matrix hidden_pre;
    Matrix hidden_out;
    Matrix fel_pre;
    Mask winners;
    Matrix fel_out;
};

struct FelForward {
    Matrix logits;
    Mask winners;
};

// Only the k winning FEL units pass their ReLU activation on.
inline FelForward fel_forward(const FelNet& net, const Matrix& x, FelCache* cache = nullptr) {
    if (x.cols() != net.hidden.fan_in()) {
        throw ShapeError("FEL input has " + std::to_string(x.cols()) + " features, expected " + std::to_string(net.hidden.fan_in()));
    }
    Matrix z1 = nn::affine(net.hidden, x);
    Matrix h = nn::relu(z1);
    Matrix p = h * net.fel.transpose();
    Mask win = top_k_mask(p, net.k);
    Matrix g = (win && (p.array() > 0.0)).select(p, 0.0);
    FelForward out{nn::affine(net.classifier, g), win};
    if (cache != nullptr) *cache = FelCache{x, std::move(z1), std::move(h), std::move(p), std::move(win), std::move(g)};
    return out;
}

struct FelGrads {
    nn::DenseLayer hidden;
    Matrix fel;  // always zero
    nn::DenseLayer classifier;
};

inline FelGrads fel_backward(const FelNet& net, const FelCache& cache, const Matrix& grad_logits) {
    if (cache.winners.rows() != grad_logits.rows() || cache.winners.cols() != net.fel.rows()) {
        throw ShapeError("FEL backward: winner mask does not match the batch");
    }
    FelGrads out;
    Matrix grad_g;
    out.classifier = nn::affine_backward(net.classifier, cache.fel_out, grad_logits, &grad_g);
    const Matrix grad_p = (cache.winners && (cache.fel_pre.array() > 0.0)).select(grad_g, 0.0);
    const Matrix grad_h = grad_p * net.fel;
    const Matrix grad_z1 = (cache.hidden_pre.array() > 0.0).select(grad_h, 0.0);
    out.hidden = nn::affine_backward(net.hidden, cache.input, grad_z1, nullptr);
    out.fel = Matrix::Zero(net.fel.rows(), net.fel.cols());
    return out;
}

struct FelLearnerConfig {
    FelConfig fel{};
    nn::OptimizerConfig optimizer{nn::OptimizerKind::Adam, 2e-2};
    nn::TrainConfig train{256, 100, 10, nn::StopMetric::ValidationAccuracy, 0};
    double validation_fraction = 0.1;
};

class FelLearner : public Learner {
public:
    FelLearner(LearnerShape shape, FelLearnerConfig config, std::uint64_t seed)
        : Learner(shape), config_(std::move(config)), seed_(seed),
          net_(FelNet::create(shape.input_dim, shape.num_classes, config_.fel, seed)) {}

    std::string id() const override { return "fel"; }
    MemoryLedger memory() const override { return {net_.parameter_count() * sizeof(double), 0}; }
    const FelNet& net() const { return net_; }

protected:
    void learn(const data::StudySession& session) override {
        const std::string tag = std::to_string(session.id);
        Rng split_rng = make_rng(seed_, "validation-" + tag);
        auto [fit_rows, val_rows] = data::stratified_holdout(session.train_y, config_.validation_fraction, split_rng);
        const Matrix fit_x = take_rows(session.train_x, fit_rows);
        const Labels fit_y = take(session.train_y, fit_rows);
        const Matrix val_x = take_rows(session.train_x, val_rows);
        const Labels val_y = take(session.train_y, val_rows);

        nn::Optimizer opt(config_.optimizer, nn::ParamList{net_.hidden, net_.classifier});
        nn::TrainConfig tc = config_.train;
        tc.seed = derive_seed(seed_, "train-" + tag);
        auto step = [&](FelNet& net, const Matrix& xb, const Labels& yb) {
            FelCache cache;
            const auto fwd = fel_forward(net, xb, &cache);
            const auto lg = nn::softmax_xent_grad(fwd.logits, yb);
            const auto grads = fel_backward(net, cache, lg.grad);
            opt.begin_step();
            opt.update_block(0, net.hidden, grads.hidden);
            opt.update_block(1, net.classifier, grads.classifier);
            return lg.loss;
        };
        auto score = [&](const FelNet& net, const Matrix& vx, const Labels& vy) {
            const Matrix z = fel_forward(net, vx).logits;
            return nn::ValidationScore{accuracy(nn::argmax_rows(z, seen_classes()), vy), nn::softmax_xent_grad(z, vy).loss};
        };
        auto result = nn::train(net_, fit_x, fit_y, val_x, val_y, tc, step, score);
        net_ = std::move(result.model);
    }

    Labels infer(const Matrix& x) const override { return nn::argmax_rows(fel_forward(net_, x).logits, seen_classes()); }

private:
    FelLearnerConfig config_;
    std::uint64_t seed_;
    FelNet net_;
};

}  // namespace forgetbench::fel
