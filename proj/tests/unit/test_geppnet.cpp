#include "support.hpp"

#include <gtest/gtest.h>

using namespace fbtest;
using geppnet::GeppNetConfig;
using geppnet::GeppNetLearner;
using geppnet::SomLattice;
using geppnet::SomSchedule;

namespace {

GeppNetConfig small_config(geppnet::Variant v = geppnet::Variant::Plain) {
    GeppNetConfig c;
    c.rows = 6;
    c.cols = 6;
    c.base_iterations = 3000;
    c.incremental_iterations = 1200;
    c.readout_learning_rate = 0.05;
    c.variant = v;
    c.stm_capacity = 50;
    c.sleep_interval = 300;
    return c;
}

}  // namespace

TEST(Som, ScheduleDecaysExponentially) {
    SomLattice som(23, 23, 3, SomSchedule{0.1, -1.0, 80000.0});
    EXPECT_DOUBLE_EQ(som.schedule().sigma0, 0.5 * std::sqrt(22.0 * 22.0 * 2.0));
    EXPECT_DOUBLE_EQ(som.learning_rate_at(0), 0.1);
    EXPECT_NEAR(som.learning_rate_at(80000), 0.1 / std::exp(1.0), 1e-15);
    EXPECT_NEAR(som.sigma_at(40000), som.schedule().sigma0 * std::exp(-0.5), 1e-12);
}

TEST(Som, BestMatchingUnitAgreesWithBruteForce) {
    Rng rng = make_rng(1, "t");
    SomLattice som(5, 7, 4, SomSchedule{});
    som.weights() = random_matrix(35, 4, rng);
    const Matrix x = random_matrix(50, 4, rng);
    const Matrix d = som.squared_distances(x);
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        int best = 0;
        double bd = 1e300;
        for (int u = 0; u < 35; ++u) {
            const double dist = (som.weights().row(u) - x.row(i)).squaredNorm();
            EXPECT_NEAR(d(i, u), dist, 1e-10);
            if (dist < bd) {
                bd = dist;
                best = u;
            }
        }
        EXPECT_EQ(som.bmu_index(x.row(i)), best);
    }
}

TEST(Som, TiesGoToTheLowestUnit) {
    SomLattice som(2, 2, 1, SomSchedule{});
    som.weights() << 1.0, -1.0, 1.0, 5.0;
    EXPECT_EQ(som.bmu_index(RowVector::Zero(1)), 0);
}

TEST(Som, NeighborhoodIsAGaussianOnTheGrid) {
    SomLattice som(4, 5, 2, SomSchedule{});
    const int winner = 7;  // row 1, col 2
    const Vector h = som.neighborhood(winner, 1.5);
    for (int u = 0; u < 20; ++u) {
        const double dr = u / 5 - 1, dc = u % 5 - 2;
        EXPECT_NEAR(h(u), std::exp(-(dr * dr + dc * dc) / (2 * 1.5 * 1.5)), 1e-15);
    }
    const Vector hard = som.neighborhood(winner, 0.0);
    EXPECT_EQ(hard.sum(), 1.0);
    EXPECT_EQ(hard(winner), 1.0);
}

TEST(Som, SingleUnitMovesTowardTheInput) {
    SomLattice som(1, 1, 3, SomSchedule{0.5, 1.0, 10.0});
    som.weights() << 0.0, 2.0, 4.0;
    RowVector x(3);
    x << 4.0, 2.0, 0.0;
    som.update_with(x, 0.25, 1.0);
    RowVector expect(3);
    expect << 1.0, 2.0, 3.0;
    EXPECT_LT((som.weights().row(0) - expect).norm(), 1e-15);
    EXPECT_EQ(som.iteration(), 0);
    som.update(x);
    EXPECT_EQ(som.iteration(), 1);
}

TEST(Som, RejectsBadShapes) {
    EXPECT_THROW(SomLattice(0, 3, 2, SomSchedule{}), ConfigError);
    EXPECT_THROW(SomLattice(2, 3, 2, SomSchedule{0.1, -1.0, 0.0}), ConfigError);
}

TEST(Confidence, GapBetweenTopTwo) {
    RowVector p(4);
    p << 0.1, 0.6, 0.05, 0.25;
    EXPECT_DOUBLE_EQ(geppnet::confidence_gap(p), 0.35);
    RowVector tie(2);
    tie << 0.5, 0.5;
    EXPECT_EQ(geppnet::confidence_gap(tie), 0.0);
    EXPECT_EQ(geppnet::confidence_gap(RowVector::Ones(1)), 1.0);
}

TEST(Activation, NormalizedAndPeakedAtClosestUnit) {
    Matrix d(2, 4);
    d << 4.0, 1.0, 9.0, 2.0, 0.5, 0.5, 3.0, 8.0;
    const Matrix a = geppnet::som_activation(d, 10.0);
    for (Eigen::Index i = 0; i < 2; ++i) {
        EXPECT_NEAR(a.row(i).sum(), 1.0, 1e-12);
        Eigen::Index arg;
        a.row(i).maxCoeff(&arg);
        Eigen::Index dmin;
        d.row(i).minCoeff(&dmin);
        EXPECT_EQ(arg, dmin);
    }
    // Unnormalized response exp(-s * (d - dmin) / dmin).
    const double r = std::exp(-10.0 * (2.0 - 1.0) / 1.0) / std::exp(0.0);
    EXPECT_NEAR(a(0, 3) / a(0, 1), r, 1e-12);
}

TEST(GeppNet, LearnsSeparableBaseClasses) {
    const auto ds = blobs_split(3, 60, 5, 0.3, 2);
    const auto stream = data::make_permutation_stream(ds, 2, 1);
    GeppNetLearner learner({5, 3}, small_config(), 3);
    learner.train_session(stream.sessions[0]);
    EXPECT_GT(accuracy(learner.predict(ds.test.features), ds.test.labels), 0.9);
    EXPECT_EQ(learner.readout_updates(), 1500);
}

TEST(GeppNet, ZeroThresholdFreezesPredictions) {
    const auto ds = blobs_split(4, 50, 5, 0.4, 4);
    const auto stream = data::make_class_incremental_stream(ds, 0.5);
    auto cfg = small_config();
    cfg.novelty_threshold = 0.0;
    GeppNetLearner learner({5, 4}, cfg, 5);
    learner.train_session(stream.sessions[0]);
    const Labels before = learner.predict(ds.test.features);
    const Matrix som = learner.som().weights();
    const auto updates = learner.readout_updates();
    learner.train_session(stream.sessions[1]);
    EXPECT_EQ(learner.predict(ds.test.features), before);
    EXPECT_EQ(learner.som().weights(), som);
    EXPECT_EQ(learner.readout_updates(), updates);
}

TEST(GeppNet, ThresholdAboveOneUpdatesOnEveryDraw) {
    const auto ds = blobs_split(4, 50, 5, 0.4, 6);
    const auto stream = data::make_class_incremental_stream(ds, 0.5);
    auto cfg = small_config();
    cfg.novelty_threshold = 1.5;
    GeppNetLearner learner({5, 4}, cfg, 7);
    learner.train_session(stream.sessions[0]);
    const auto updates = learner.readout_updates();
    learner.train_session(stream.sessions[1]);
    EXPECT_EQ(learner.readout_updates() - updates, cfg.incremental_iterations);
    const Labels pred = learner.predict(stream.sessions[1].test_x);
    EXPECT_GT(accuracy(pred, stream.sessions[1].test_y), 0.5);
}

TEST(GeppNet, StorageGrowsEverySession) {
    const auto ds = blobs_split(5, 30, 4, 0.4, 8);
    const auto stream = data::make_class_incremental_stream(ds, 0.4);
    GeppNetLearner learner({4, 5}, small_config(), 9);
    const auto model = learner.memory().model_bytes;
    std::size_t aux = learner.memory().aux_bytes;
    Eigen::Index rows = 0;
    for (const auto& s : stream.sessions) {
        learner.train_session(s);
        rows += s.train_x.rows();
        EXPECT_EQ(learner.stored_rows(), rows);
        EXPECT_GT(learner.memory().aux_bytes, aux);
        EXPECT_EQ(learner.memory().model_bytes, model);
        aux = learner.memory().aux_bytes;
    }
}

TEST(GeppNetStm, SleepsOnScheduleAndEmptiesTheBuffer) {
    const auto ds = blobs_split(4, 50, 5, 0.4, 10);
    const auto stream = data::make_class_incremental_stream(ds, 0.5);
    auto cfg = small_config(geppnet::Variant::STM);
    cfg.novelty_threshold = 1.5;
    GeppNetLearner learner({5, 4}, cfg, 11);
    EXPECT_EQ(learner.id(), "geppnet_stm");
    learner.train_session(stream.sessions[0]);
    const auto updates = learner.readout_updates();
    learner.train_session(stream.sessions[1]);
    EXPECT_EQ(learner.last_session_sleeps(), 1200 / 300);
    EXPECT_EQ(learner.stm_size(), 0u);
    // Every draw is novel; each sleep replays a full buffer.
    EXPECT_EQ(learner.readout_updates() - updates, 4 * 50);
}

TEST(GeppNet, SameSeedSameModel) {
    const auto ds = blobs_split(3, 30, 4, 0.4, 12);
    const auto stream = data::make_class_incremental_stream(ds, 0.5);
    GeppNetLearner a({4, 3}, small_config(), 13), b({4, 3}, small_config(), 13);
    for (const auto& s : stream.sessions) {
        a.train_session(s);
        b.train_session(s);
    }
    EXPECT_EQ(a.som().weights(), b.som().weights());
    EXPECT_EQ(a.readout().weight, b.readout().weight);
}

TEST(GeppNetConfig, Validation) {
    auto c = small_config();
    c.som_init_fraction = 1.5;
    EXPECT_THROW(c.validate(), ConfigError);
    c = small_config(geppnet::Variant::STM);
    c.stm_capacity = 0;
    EXPECT_THROW(c.validate(), ConfigError);
}
