#pragma once

#include "forgetbench/core/rng.hpp"
#include "forgetbench/data/dataset.hpp"
#include "forgetbench/learner/accuracy.hpp"
#include "forgetbench/learner/learner.hpp"
#include "forgetbench/nn/dense.hpp"
#include "forgetbench/nn/loss.hpp"
#include "forgetbench/nn/optimizer.hpp"
#include "forgetbench/nn/trainer.hpp"

#include <limits>
#include <string>
#include <vector>

namespace forgetbench {

struct MlpConfig {
    std::vector<int> hidden{400, 400};
    nn::OptimizerConfig optimizer{nn::OptimizerKind::Nadam, 8e-4};
    nn::TrainConfig train{256, 100, 10, nn::StopMetric::ValidationAccuracy, 0};
    double validation_fraction = 0.1;
};

// Plain multilayer perceptron trained session by session with early stopping
// on a seeded 10% validation split of the current session. A fresh optimizer
// is created for every session.
class MlpLearner : public Learner {
public:
    MlpLearner(LearnerShape shape, MlpConfig config, std::uint64_t seed)
        : Learner(shape), config_(std::move(config)), seed_(seed) {
        std::vector<int> sizes{shape.input_dim};
        sizes.insert(sizes.end(), config_.hidden.begin(), config_.hidden.end());
        sizes.push_back(shape.num_classes);
        Rng rng = make_rng(seed_, "init");
        net_ = nn::NetParams::he_init(sizes, rng);
    }

    std::string id() const override { return "mlp"; }

    MemoryLedger memory() const override { return {net_.parameter_count() * sizeof(double), 0}; }

    const nn::NetParams& net() const { return net_; }
    const MlpConfig& config() const { return config_; }
    const std::vector<nn::EpochLog>& last_epochs() const { return last_epochs_; }

    // Logits with unseen classes pushed to -inf.
    Matrix masked_logits(const Matrix& x) const {
        Matrix z = nn::logits(net_, x);
        for (Eigen::Index c = 0; c < z.cols(); ++c) {
            if (!seen_classes()[static_cast<std::size_t>(c)]) z.col(c).setConstant(-std::numeric_limits<double>::infinity());
        }
        return z;
    }

protected:
    // Extra loss term added to every mini-batch; adds its gradient to `grads`.
    virtual double penalty(const nn::NetParams& net, nn::ParamList& grads) const {
        (void)net;
        (void)grads;
        return 0.0;
    }

    virtual void after_session(const data::StudySession& session) { (void)session; }

    void learn(const data::StudySession& session) override {
        const std::string tag = std::to_string(session.id);
        Rng split_rng = make_rng(seed_, "validation-" + tag);
        auto [fit_rows, val_rows] = data::stratified_holdout(session.train_y, config_.validation_fraction, split_rng);
        const Matrix fit_x = take_rows(session.train_x, fit_rows);
        const Labels fit_y = take(session.train_y, fit_rows);
        const Matrix val_x = take_rows(session.train_x, val_rows);
        const Labels val_y = take(session.train_y, val_rows);

        nn::Optimizer opt(config_.optimizer, net_.layers);
        nn::TrainConfig tc = config_.train;
        tc.seed = derive_seed(seed_, "train-" + tag);

        auto step = [&](nn::NetParams& net, const Matrix& xb, const Labels& yb) {
            auto pass = nn::forward(net, xb);
            auto lg = nn::softmax_xent_grad(pass.logits, yb);
            auto grads = nn::backward(net, pass.cache, lg.grad);
            const double extra = penalty(net, grads);
            opt.step(net, grads);
            return lg.loss + extra;
        };
        auto score = [&](const nn::NetParams& net, const Matrix& vx, const Labels& vy) {
            Matrix z = nn::logits(net, vx);
            const auto lg = nn::softmax_xent_grad(z, vy);
            return nn::ValidationScore{accuracy(nn::argmax_rows(z, seen_classes()), vy), lg.loss};
        };
        auto result = nn::train(net_, fit_x, fit_y, val_x, val_y, tc, step, score);
        net_ = std::move(result.model);
        last_epochs_ = std::move(result.epochs);
        after_session(session);
    }

    Labels infer(const Matrix& x) const override { return nn::argmax_rows(nn::logits(net_, x), seen_classes()); }

    MlpConfig config_;
    std::uint64_t seed_;
    nn::NetParams net_;
    std::vector<nn::EpochLog> last_epochs_;
};

}  // namespace forgetbench
