#include "support.hpp"

#include <gtest/gtest.h>

using namespace fbtest;
using pathnet::Genotype;
using pathnet::State;
using pathnet::Topology;

namespace {

State make_state(Topology topo, int d, int c, std::uint64_t seed) {
    Rng rng = make_rng(seed, "t");
    State s = State::create(topo, d, c, rng);
    s.heads.push_back(nn::he_uniform(c, topo.units, rng));
    s.task_classes.push_back({});
    for (int k = 0; k < c; ++k) s.task_classes.back().push_back(k);
    return s;
}

pathnet::PathNetConfig tiny_config() {
    pathnet::PathNetConfig c;
    c.topology = {2, 4, 2, 6};
    c.ga = {4, 3, 1, -1.0, 3};
    c.optimizer = {nn::OptimizerKind::Adam, 1e-2};
    c.batch_size = 8;
    c.final_train = {8, 5, 2, nn::StopMetric::ValidationAccuracy, 0};
    return c;
}

}  // namespace

TEST(PathForward, ZeroModulesGiveHeadBias) {
    Topology topo{2, 3, 2, 4};
    State s = make_state(topo, 5, 3, 1);
    for (auto& m : s.modules) m = nn::DenseLayer::zeros_like(m);
    s.heads[0].bias << 0.1, -0.2, 0.3;
    Rng rng = make_rng(2, "t");
    const Matrix z = pathnet::forward_on_path(s, Genotype{{{0}, {1}}}, 1, random_matrix(4, 5, rng));
    for (Eigen::Index i = 0; i < 4; ++i) EXPECT_EQ(RowVector(z.row(i)), RowVector(s.heads[0].bias.transpose()));
}

TEST(PathForward, IdenticalModulesDoubleTheLayerOutput) {
    Topology topo{1, 2, 2, 3};
    State s = make_state(topo, 4, 2, 3);
    s.modules[1] = s.modules[0];
    s.heads[0].bias.setZero();
    Rng rng = make_rng(4, "t");
    const Matrix x = random_matrix(3, 4, rng);
    const Matrix one = pathnet::forward_on_path(s, Genotype{{{0}}}, 1, x);
    const Matrix two = pathnet::forward_on_path(s, Genotype{{{0, 1}}}, 1, x);
    EXPECT_LT((two - 2.0 * one).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(PathForward, MatchesStraightLineEvaluation) {
    Topology topo{2, 4, 3, 5};
    State s = make_state(topo, 6, 3, 5);
    Rng rng = make_rng(6, "t");
    const Genotype g{{{0, 2, 3}, {1, 3}}};
    const Matrix x = random_matrix(2, 6, rng);
    const Matrix z = pathnet::forward_on_path(s, g, 1, x);
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        Vector h1 = Vector::Zero(5);
        for (int m : {0, 2, 3}) {
            const auto& w = s.modules[static_cast<std::size_t>(m)];
            for (int u = 0; u < 5; ++u) {
                double a = w.bias(u);
                for (int j = 0; j < 6; ++j) a += w.weight(u, j) * x(i, j);
                h1(u) += std::max(0.0, a);
            }
        }
        Vector h2 = Vector::Zero(5);
        for (int m : {1, 3}) {
            const auto& w = s.modules[static_cast<std::size_t>(4 + m)];
            for (int u = 0; u < 5; ++u) {
                double a = w.bias(u);
                for (int j = 0; j < 5; ++j) a += w.weight(u, j) * h1(j);
                h2(u) += std::max(0.0, a);
            }
        }
        for (int c = 0; c < 3; ++c) {
            double a = s.heads[0].bias(c);
            for (int j = 0; j < 5; ++j) a += s.heads[0].weight(c, j) * h2(j);
            EXPECT_NEAR(z(i, c), a, 1e-12);
        }
    }
    EXPECT_THROW(pathnet::forward_on_path(s, g, 2, x), StateError);
}

TEST(PathForward, AllModulesSelectedEqualsWidePlainNet) {
    Topology topo{2, 3, 3, 4};
    State s = make_state(topo, 5, 2, 7);
    const Genotype g{{{0, 1, 2}, {0, 1, 2}}};
    const int M = 3, U = 4;
    // Summing module outputs is a tiled identity after the wide layer.
    Matrix tile = Matrix::Zero(U, M * U);
    for (int m = 0; m < M; ++m) tile.middleCols(m * U, U) = Matrix::Identity(U, U);
    nn::DenseLayer l1 = nn::DenseLayer::zeros(M * U, 5);
    nn::DenseLayer l2 = nn::DenseLayer::zeros(M * U, M * U);
    for (int m = 0; m < M; ++m) {
        l1.weight.middleRows(m * U, U) = s.modules[static_cast<std::size_t>(m)].weight;
        l1.bias.segment(m * U, U) = s.modules[static_cast<std::size_t>(m)].bias;
        l2.weight.middleRows(m * U, U) = s.modules[static_cast<std::size_t>(M + m)].weight * tile;
        l2.bias.segment(m * U, U) = s.modules[static_cast<std::size_t>(M + m)].bias;
    }
    nn::DenseLayer head{s.heads[0].weight * tile, s.heads[0].bias};
    const auto plain = nn::NetParams::from_layers({l1, l2, head});
    Rng rng = make_rng(8, "t");
    const Matrix x = random_matrix(5, 5, rng);
    EXPECT_LT((pathnet::forward_on_path(s, g, 1, x) - nn::logits(plain, x)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(PathBackward, MatchesFiniteDifferences) {
    Topology topo{2, 3, 2, 4};
    State s = make_state(topo, 5, 3, 9);
    const Genotype g{{{0, 2}, {1}}};
    Rng rng = make_rng(10, "t");
    const Matrix x = random_matrix(6, 5, rng);
    const Labels y = random_labels(6, 3, rng);
    pathnet::PathCache cache;
    const Matrix z = pathnet::forward_on_path(s, g, s.heads[0], x, &cache);
    const auto grads = pathnet::backward_on_path(s, g, s.heads[0], cache, nn::softmax_xent_grad(z, y).grad);
    auto loss = [&] { return nn::softmax_xent_grad(pathnet::forward_on_path(s, g, 1, x), y).loss; };
    for (const auto& [idx, grad] : grads.modules) {
        for (Eigen::Index i = 0; i < grad.weight.size(); ++i) {
            const double fd = central_difference(s.modules[idx].weight.data() + i, loss);
            EXPECT_LT(relative_error(fd, grad.weight.data()[i]), 1e-5);
        }
    }
    for (Eigen::Index i = 0; i < grads.head.weight.size(); ++i) {
        const double fd = central_difference(s.heads[0].weight.data() + i, loss);
        EXPECT_LT(relative_error(fd, grads.head.weight.data()[i]), 1e-5);
    }
}

TEST(Genotype, MutationPreservesValidity) {
    Topology topo{2, 10, 5, 8};
    Rng rng = make_rng(11, "t");
    Genotype g = Genotype::random(topo, rng);
    for (int i = 0; i < 500; ++i) {
        g = pathnet::mutate(g, topo, 0.5, rng);
        ASSERT_TRUE(g.valid(topo));
    }
    EXPECT_EQ(pathnet::mutate(g, topo, 0.0, rng), g);
    EXPECT_FALSE((Genotype{{{0, 0}, {1}}}).valid(topo));
    EXPECT_FALSE((Genotype{{{10}, {1}}}).valid(topo));
}

TEST(Evolution, ClosedPopulationReturnsThatGenotype) {
    const auto ds = blobs_split(2, 20, 5, 0.3, 12);
    auto cfg = tiny_config();
    cfg.ga.mutation_rate = 0.0;
    State s = make_state(cfg.topology, 5, 2, 13);
    pathnet::PathTrainer trainer(s, cfg);
    const Genotype g{{{1, 3}, {0}}};
    const auto winner = pathnet::evolve_session(s, trainer, cfg, ds.train.features, ds.train.labels, ds.test.features,
                                                ds.test.labels, {true, true}, 1, nullptr, std::vector<Genotype>(4, g));
    EXPECT_EQ(winner, g);
}

TEST(Evolution, TournamentReplaysFromTheSeed) {
    const auto ds = blobs_split(2, 20, 5, 0.3, 14);
    auto cfg = tiny_config();
    cfg.ga.generations = 1;
    State s = make_state(cfg.topology, 5, 2, 15);
    pathnet::PathTrainer trainer(s, cfg);
    pathnet::EvolutionTrace trace;
    pathnet::evolve_session(s, trainer, cfg, ds.train.features, ds.train.labels, ds.test.features, ds.test.labels,
                            {true, true}, 77, &trace);
    ASSERT_EQ(trace.pairs.size(), 1u);
    // Replay: population draws, then the pair.
    Rng rng = make_rng(77, "ga");
    for (int i = 0; i < cfg.ga.population; ++i) (void)Genotype::random(cfg.topology, rng);
    std::uniform_int_distribution<int> pick(0, cfg.ga.population - 1);
    const int a = pick(rng);
    int b = pick(rng);
    while (b == a) b = pick(rng);
    EXPECT_EQ(trace.pairs[0], std::make_pair(a, b));
}

TEST(PathNetLearner, FrozenTaskPredictionsSurviveLaterTasks) {
    const auto ds = blobs_split(3, 30, 6, 0.4, 16);
    const auto stream = data::make_permutation_stream(ds, 3, 4);
    pathnet::PathNetLearner learner({6, 3}, tiny_config(), 5);
    learner.train_session(stream.sessions[0]);
    const Labels first = learner.predict_for_task(stream.sessions[0].test_x, 1);
    const auto modules = learner.state().modules;
    const auto frozen = learner.state().frozen;
    int frozen_before = learner.state().frozen_count();
    for (int t = 1; t < 3; ++t) {
        learner.train_session(stream.sessions[static_cast<std::size_t>(t)]);
        EXPECT_GE(learner.state().frozen_count(), frozen_before);
        frozen_before = learner.state().frozen_count();
    }
    EXPECT_EQ(learner.predict_for_task(stream.sessions[0].test_x, 1), first);
    for (std::size_t k = 0; k < modules.size(); ++k) {
        if (frozen[k]) {
            EXPECT_EQ(learner.state().modules[k].weight, modules[k].weight);
        }
    }
    EXPECT_THROW(learner.predict_for_task(stream.sessions[0].test_x, 4), StateError);
    EXPECT_THROW(learner.predict(stream.sessions[0].test_x), StateError);
}

TEST(PathNetLearner, MemoryGrowsByOneHeadPerSession) {
    const auto ds = blobs_split(2, 20, 4, 0.4, 17);
    const auto stream = data::make_permutation_stream(ds, 3, 1);
    const auto cfg = tiny_config();
    pathnet::PathNetLearner learner({4, 2}, cfg, 6);
    const auto model = learner.memory().model_bytes;
    const std::size_t head = (cfg.topology.units * 2 + 2) * sizeof(double);
    for (int t = 0; t < 3; ++t) {
        learner.train_session(stream.sessions[static_cast<std::size_t>(t)]);
        EXPECT_EQ(learner.memory().model_bytes, model);
        EXPECT_EQ(learner.memory().aux_bytes, head * static_cast<std::size_t>(t + 1));
    }
}

TEST(PathNetLearner, SaturatedNetworkOnlyTrainsHeads) {
    const auto ds = blobs_split(2, 20, 4, 0.4, 18);
    const auto stream = data::make_permutation_stream(ds, 2, 1);
    auto cfg = tiny_config();
    cfg.topology = {2, 2, 2, 4};
    pathnet::PathNetLearner learner({4, 2}, cfg, 7);
    learner.train_session(stream.sessions[0]);
    auto& st = const_cast<State&>(learner.state());
    std::fill(st.frozen.begin(), st.frozen.end(), true);
    const auto modules = st.modules;
    learner.train_session(stream.sessions[1]);
    for (std::size_t k = 0; k < modules.size(); ++k) EXPECT_EQ(learner.state().modules[k].weight, modules[k].weight);
}
