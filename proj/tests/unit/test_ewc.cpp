#include "support.hpp"

#include <gtest/gtest.h>

#include <optional>

using namespace fbtest;

namespace {

nn::NetParams small_net(Rng& rng) {
    const std::vector<int> sizes{4, 5, 3};
    return nn::NetParams::he_init(sizes, rng);
}

ewc::Anchor random_anchor(const nn::NetParams& net, Rng& rng, double lambda) {
    ewc::Anchor a{nn::zeros_like(net.layers), nn::zeros_like(net.layers), lambda};
    for (std::size_t k = 0; k < net.layers.size(); ++k) {
        a.theta[k].weight = random_matrix(net.layers[k].weight.rows(), net.layers[k].weight.cols(), rng);
        a.theta[k].bias = random_matrix(net.layers[k].bias.size(), 1, rng);
        a.fisher[k].weight = random_matrix(net.layers[k].weight.rows(), net.layers[k].weight.cols(), rng).cwiseAbs();
        a.fisher[k].bias = random_matrix(net.layers[k].bias.size(), 1, rng).cwiseAbs();
    }
    return a;
}

}  // namespace

TEST(EwcPenalty, HandComputedValue) {
    nn::ParamList theta{nn::DenseLayer::zeros(1, 2)};
    theta[0].weight << 1.0, 3.0;
    ewc::Anchor a{{nn::DenseLayer::zeros(1, 2)}, {nn::DenseLayer::zeros(1, 2)}, 4.0};
    a.fisher[0].weight << 0.5, 2.0;
    a.theta[0].weight << 0.0, 1.0;
    // (4/2) * (0.5 * 1 + 2 * 4) = 17
    EXPECT_DOUBLE_EQ(ewc::penalty(theta, {{a}}), 17.0);
    EXPECT_DOUBLE_EQ(ewc::penalty(a.theta, {{a}}), 0.0);
}

TEST(EwcPenalty, LossGradientMatchesFiniteDifferences) {
    Rng rng = make_rng(1, "t");
    auto net = small_net(rng);
    ewc::EwcState state{{random_anchor(net, rng, 3.0), random_anchor(net, rng, 3.0)}};
    const Matrix x = random_matrix(6, 4, rng);
    const Labels y = random_labels(6, 3, rng);
    const auto lg = ewc::ewc_loss_grad(net, x, y, state);
    auto loss = [&] { return ewc::ewc_loss_grad(net, x, y, state).loss; };
    for (std::size_t k = 0; k < net.layers.size(); ++k) {
        for (Eigen::Index i = 0; i < net.layers[k].weight.size(); ++i) {
            const double fd = central_difference(net.layers[k].weight.data() + i, loss);
            EXPECT_LT(relative_error(fd, lg.grads[k].weight.data()[i]), 1e-5);
        }
    }
}

TEST(EwcMerge, SameGradientAsSeparateAnchors) {
    Rng rng = make_rng(2, "t");
    auto net = small_net(rng);
    ewc::EwcState state{{random_anchor(net, rng, 5.0), random_anchor(net, rng, 5.0), random_anchor(net, rng, 5.0)}};
    const auto merged = ewc::merge_anchors(state);
    ASSERT_EQ(merged.anchors.size(), 1u);
    std::optional<double> offset;
    for (int trial = 0; trial < 3; ++trial) {
        nn::ParamList theta = random_anchor(net, rng, 1.0).theta;
        auto g1 = nn::zeros_like(theta);
        auto g2 = nn::zeros_like(theta);
        const double p1 = ewc::penalty(theta, state, &g1);
        const double p2 = ewc::penalty(theta, merged, &g2);
        for (std::size_t k = 0; k < theta.size(); ++k) {
            EXPECT_LT((g1[k].weight - g2[k].weight).cwiseAbs().maxCoeff(), 1e-9);
            EXPECT_LT((g1[k].bias - g2[k].bias).cwiseAbs().maxCoeff(), 1e-9);
        }
        // Constant offset: the difference does not depend on theta.
        if (!offset) offset = p1 - p2;
        EXPECT_NEAR(p1 - p2, *offset, 1e-9);
    }
    state.anchors[1].lambda = 1.0;
    EXPECT_THROW(ewc::merge_anchors(state), ConfigError);
}

TEST(Fisher, NonNegativeAndClampedToAvailableRows) {
    Rng rng = make_rng(3, "t");
    auto net = small_net(rng);
    const Matrix x = random_matrix(10, 4, rng);
    const auto f = ewc::estimate_fisher(net, x, 50, rng);
    EXPECT_TRUE(f.clamped);
    EXPECT_EQ(f.samples, 10);
    for (const auto& layer : f.diagonal) EXPECT_GE(layer.weight.minCoeff(), 0.0);
    double total = 0.0;
    for (const auto& layer : f.diagonal) total += layer.weight.sum();
    EXPECT_GT(total, 0.0);
}

TEST(EwcLearner, LambdaZeroMatchesMlp) {
    const auto ds = blobs_split(3, 30, 5, 0.5, 4);
    const auto stream = data::make_permutation_stream(ds, 2, 3);
    ewc::EwcConfig cfg;
    cfg.mlp.hidden = {12};
    cfg.mlp.train = {32, 10, 3, nn::StopMetric::ValidationAccuracy, 0};
    cfg.lambda = 0.0;
    cfg.fisher_samples = 20;
    ewc::EwcLearner e({5, 3}, cfg, 9);
    MlpLearner m({5, 3}, cfg.mlp, 9);
    for (const auto& s : stream.sessions) {
        e.train_session(s);
        m.train_session(s);
    }
    EXPECT_EQ(e.net().layers[0].weight, m.net().layers[0].weight);
}

TEST(EwcLearner, MergedMemoryIsConstantAndUnmergedGrows) {
    const auto ds = blobs_split(2, 20, 3, 0.5, 5);
    const auto stream = data::make_permutation_stream(ds, 3, 3);
    ewc::EwcConfig cfg;
    cfg.mlp.hidden = {6};
    cfg.mlp.train = {16, 3, 2, nn::StopMetric::ValidationAccuracy, 0};
    cfg.fisher_samples = 10;
    ewc::EwcLearner merged({3, 2}, cfg, 1);
    cfg.merge_anchors = false;
    ewc::EwcLearner separate({3, 2}, cfg, 1);
    const auto m0 = merged.memory().aux_bytes;
    std::size_t last = 0;
    for (const auto& s : stream.sessions) {
        merged.train_session(s);
        separate.train_session(s);
        EXPECT_EQ(merged.memory().aux_bytes, m0);
        EXPECT_GT(separate.memory().aux_bytes, last);
        last = separate.memory().aux_bytes;
    }
    EXPECT_EQ(merged.state().anchors.size(), 1u);
    EXPECT_EQ(separate.state().anchors.size(), 3u);
}
