#include "support.hpp"

#include <gtest/gtest.h>

using namespace fbtest;

TEST(Softmax, RowsSumToOneAndAreShiftInvariant) {
    Rng rng = make_rng(1, "t");
    Matrix z = random_matrix(5, 7, rng, 10.0);
    Matrix p = nn::softmax(z);
    for (Eigen::Index i = 0; i < p.rows(); ++i) EXPECT_NEAR(p.row(i).sum(), 1.0, 1e-12);
    Matrix shifted = z.array() + 1000.0;
    EXPECT_LT((nn::softmax(shifted) - p).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(CrossEntropy, MatchesDirectFormula) {
    Matrix z(2, 3);
    z << 1.0, 2.0, 3.0, 0.5, -0.5, 0.0;
    const Labels y{2, 0};
    const auto lg = nn::softmax_xent_grad(z, y);
    double expect = 0.0;
    for (int i = 0; i < 2; ++i) {
        double norm = 0.0;
        for (int c = 0; c < 3; ++c) norm += std::exp(z(i, c));
        expect -= std::log(std::exp(z(i, y[static_cast<std::size_t>(i)])) / norm);
    }
    EXPECT_NEAR(lg.loss, expect / 2.0, 1e-12);
    EXPECT_THROW(nn::softmax_xent_grad(z, Labels{3, 0}), InputError);
}

TEST(Backprop, MatchesFiniteDifferences) {
    Rng rng = make_rng(2, "t");
    const std::vector<int> sizes{6, 5, 4, 3};
    auto net = nn::NetParams::he_init(sizes, rng);
    // Nonzero biases keep pre-activations off the ReLU kink.
    for (auto& layer : net.layers) layer.bias = random_matrix(layer.fan_out(), 1, rng, 0.3).col(0);
    const Matrix x = random_matrix(8, 6, rng);
    const Labels y = random_labels(8, 3, rng);
    const auto pass = nn::forward(net, x);
    const auto grads = nn::backward(net, pass.cache, nn::softmax_xent_grad(pass.logits, y).grad);
    auto loss = [&] { return nn::softmax_xent_grad(nn::logits(net, x), y).loss; };
    for (std::size_t k = 0; k < net.layers.size(); ++k) {
        for (Eigen::Index i = 0; i < net.layers[k].weight.size(); ++i) {
            const double fd = central_difference(net.layers[k].weight.data() + i, loss);
            EXPECT_LT(relative_error(fd, grads[k].weight.data()[i]), 1e-5) << "layer " << k << " weight " << i;
        }
        for (Eigen::Index i = 0; i < net.layers[k].bias.size(); ++i) {
            const double fd = central_difference(net.layers[k].bias.data() + i, loss);
            EXPECT_LT(relative_error(fd, grads[k].bias(i)), 1e-5) << "layer " << k << " bias " << i;
        }
    }
}

TEST(Forward, ShapeErrorNamesTheLayer) {
    Rng rng = make_rng(3, "t");
    const std::vector<int> sizes{4, 3, 2};
    const auto net = nn::NetParams::he_init(sizes, rng);
    try {
        nn::forward(net, Matrix::Zero(2, 5));
        FAIL() << "expected a shape error";
    } catch (const ShapeError& e) {
        EXPECT_NE(std::string(e.what()).find("layer 0"), std::string::npos) << e.what();
    }
}

TEST(Params, ValidateRejectsMismatchedLayers) {
    nn::ParamList layers{nn::DenseLayer::zeros(3, 4), nn::DenseLayer::zeros(2, 5)};
    EXPECT_THROW(nn::NetParams::from_layers(layers), ShapeError);
}

TEST(HeInit, RespectsLimitAndZeroBias) {
    Rng rng = make_rng(4, "t");
    const auto layer = nn::he_uniform(50, 24, rng);
    EXPECT_LE(layer.weight.cwiseAbs().maxCoeff(), std::sqrt(6.0 / 24.0));
    EXPECT_EQ(layer.bias.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Argmax, TiesGoToLowestIndexAndMaskIsHonoured) {
    Matrix s(2, 3);
    s << 1.0, 1.0, 0.0, 0.0, 2.0, 5.0;
    EXPECT_EQ(nn::argmax_rows(s), (Labels{0, 2}));
    EXPECT_EQ(nn::argmax_rows(s, std::vector<bool>{true, true, false}), (Labels{0, 1}));
}

TEST(Optimizer, AdamFirstStepMovesByLearningRate) {
    nn::ParamList p{nn::DenseLayer::zeros(1, 2)};
    p[0].weight << 1.0, -1.0;
    nn::ParamList g{nn::DenseLayer::zeros(1, 2)};
    g[0].weight << 0.5, -3.0;
    nn::Optimizer opt({nn::OptimizerKind::Adam, 0.1}, p);
    opt.step(p, {nn::LayerMask::all(p[0], true)}, g);
    // Bias-corrected first Adam step is lr * sign(g) up to epsilon.
    EXPECT_NEAR(p[0].weight(0, 0), 0.9, 1e-6);
    EXPECT_NEAR(p[0].weight(0, 1), -0.9, 1e-6);
    EXPECT_EQ(p[0].bias(0), 0.0);
}

TEST(Optimizer, SgdStepIsPlainDescent) {
    nn::ParamList p{nn::DenseLayer::zeros(2, 1)};
    nn::ParamList g{nn::DenseLayer::zeros(2, 1)};
    g[0].weight << 2.0, -4.0;
    g[0].bias << 1.0, 0.0;
    nn::Optimizer opt({nn::OptimizerKind::SGD, 0.25}, p);
    opt.step(p, {nn::LayerMask::all(p[0], true)}, g);
    EXPECT_DOUBLE_EQ(p[0].weight(0, 0), -0.5);
    EXPECT_DOUBLE_EQ(p[0].weight(1, 0), 1.0);
    EXPECT_DOUBLE_EQ(p[0].bias(0), -0.25);
}

TEST(Optimizer, NadamMatchesHandComputedStep) {
    const double lr = 0.01, b1 = 0.9, b2 = 0.999, eps = 1e-8, grad = 0.3;
    nn::ParamList p{nn::DenseLayer::zeros(1, 1)};
    nn::ParamList g{nn::DenseLayer::zeros(1, 1)};
    g[0].weight(0, 0) = grad;
    nn::Optimizer opt({nn::OptimizerKind::Nadam, lr, b1, b2, eps}, p);
    opt.step(p, {nn::LayerMask::all(p[0], true)}, g);
    const double m = (1 - b1) * grad;
    const double v = (1 - b2) * grad * grad;
    const double mhat = b1 * m / (1 - b1 * b1) + (1 - b1) * grad / (1 - b1);
    const double expect = -lr * mhat / (std::sqrt(v / (1 - b2)) + eps);
    EXPECT_NEAR(p[0].weight(0, 0), expect, 1e-12);
}

TEST(Optimizer, MaskedEntriesStayBitIdentical) {
    Rng rng = make_rng(5, "t");
    nn::ParamList p{nn::he_uniform(3, 3, rng)};
    const auto before = p[0];
    auto mask = nn::LayerMask::all(p[0], true);
    mask.weight(1, 2) = false;
    mask.bias(0) = false;
    nn::Optimizer opt({nn::OptimizerKind::Adam, 0.1}, p);
    for (int s = 0; s < 5; ++s) opt.step(p, {mask}, {nn::DenseLayer{random_matrix(3, 3, rng), Vector::Ones(3)}});
    EXPECT_EQ(p[0].weight(1, 2), before.weight(1, 2));
    EXPECT_EQ(p[0].bias(0), before.bias(0));
    EXPECT_EQ(opt.first_moment()[0].weight(1, 2), 0.0);
    EXPECT_NE(p[0].weight(0, 0), before.weight(0, 0));
}

TEST(Optimizer, ShapeMismatchThrows) {
    nn::ParamList p{nn::DenseLayer::zeros(2, 2)};
    nn::Optimizer opt({}, p);
    nn::ParamList g{nn::DenseLayer::zeros(3, 2)};
    EXPECT_THROW(opt.step(p, {nn::LayerMask::all(p[0], true)}, g), ShapeError);
}

TEST(Trainer, ReturnsBestValidationSnapshot) {
    // Model is a counter; validation accuracy peaks at epoch 3.
    const Matrix x = Matrix::Zero(4, 1);
    const Labels y{0, 0, 0, 0};
    nn::TrainConfig cfg{4, 50, 2, nn::StopMetric::ValidationAccuracy, 1};
    auto step = [](int& m, const Matrix&, const Labels&) {
        ++m;
        return 0.0;
    };
    auto score = [](const int& m, const Matrix&, const Labels&) {
        return nn::ValidationScore{m == 3 ? 1.0 : 0.5, 0.0};
    };
    const auto r = nn::train(0, x, y, x, y, cfg, step, score);
    EXPECT_EQ(r.model, 3);
    EXPECT_EQ(r.best_epoch, 3);
    EXPECT_EQ(r.epochs.size(), 5u);  // two epochs of patience after the best
}

TEST(Trainer, WithoutValidationRunsAllEpochs) {
    const Matrix x = Matrix::Zero(3, 1);
    nn::TrainConfig cfg{2, 7, 1, nn::StopMetric::ValidationLoss, 1};
    const auto r = nn::train(0, x, Labels{0, 0, 0}, Matrix(0, 1), Labels{}, cfg,
                             [](int& m, const Matrix&, const Labels&) { return static_cast<double>(++m); },
                             [](const int&, const Matrix&, const Labels&) { return nn::ValidationScore{}; });
    EXPECT_EQ(r.model, 14);  // 2 batches per epoch
    EXPECT_EQ(r.epochs.size(), 7u);
}

TEST(Trainer, RejectsEmptyDataAndBadConfig) {
    nn::TrainConfig cfg;
    auto step = [](int&, const Matrix&, const Labels&) { return 0.0; };
    auto score = [](const int&, const Matrix&, const Labels&) { return nn::ValidationScore{}; };
    EXPECT_THROW(nn::train(0, Matrix(0, 2), Labels{}, Matrix(0, 2), Labels{}, cfg, step, score), InputError);
    cfg.batch_size = 0;
    EXPECT_THROW(nn::train(0, Matrix::Zero(1, 2), Labels{0}, Matrix(0, 2), Labels{}, cfg, step, score), ConfigError);
}

TEST(Rng, NamedStreamsAreIndependentAndStable) {
    Rng a = make_rng(9, "init");
    Rng b = make_rng(9, "init");
    Rng c = make_rng(9, "shuffle");
    const auto va = a();
    EXPECT_EQ(va, b());
    EXPECT_NE(va, c());
    EXPECT_NE(derive_seed(1, "x"), derive_seed(2, "x"));
}
