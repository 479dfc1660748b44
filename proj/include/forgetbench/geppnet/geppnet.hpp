#pragma once

#include "forgetbench/core/rng.hpp"
#include "forgetbench/geppnet/som.hpp"
#include "forgetbench/learner/learner.hpp"
#include "forgetbench/nn/dense.hpp"
#include "forgetbench/nn/loss.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>
#include <random>
#include <string>
#include <vector>

namespace forgetbench::geppnet {

enum class Variant { Plain, STM };

struct GeppNetConfig {
    int rows = 23;
    int cols = 23;
    double som_learning_rate = 0.1;
    double readout_learning_rate = 1e-3;
    long base_iterations = 80000;
    long incremental_iterations = 20000;
    double som_init_fraction = 0.5;  // share of the base budget spent on SOM-only updates
    double novelty_threshold = 0.5;  // theta_m^inc
    double activation_sharpness = 30.0;
    Variant variant = Variant::Plain;
    int stm_capacity = 1500;
    long sleep_interval = 2000;

    void validate() const {
        if (rows < 1 || cols < 1) throw ConfigError("SOM shape must be positive");
        if (base_iterations < 0 || incremental_iterations < 0) throw ConfigError("GeppNet budgets must be >= 0");
        if (som_init_fraction < 0.0 || som_init_fraction > 1.0) throw ConfigError("som_init_fraction must lie in [0, 1]");
        if (activation_sharpness <= 0.0) throw ConfigError("activation_sharpness must be positive");
        if (variant == Variant::STM && (stm_capacity < 1 || sleep_interval < 1)) {
            throw ConfigError("STM capacity and sleep interval must be >= 1");
        }
    }
};

// Top-1 minus top-2 probability; 1 when there is no runner-up.
inline double confidence_gap(const RowVector& probs) {
    if (probs.size() < 2) return 1.0;
    double first = -1.0;
    double second = -1.0;
    for (Eigen::Index i = 0; i < probs.size(); ++i) {
        const double p = probs(i);
        if (p > first) {
            second = first;
            first = p;
        } else if (p > second) {
            second = p;
        }
    }
    return first - second;
}

// Gaussian responses of every unit, normalized to sum 1. Distances are
// measured relative to the closest unit so the width adapts to the input scale.
inline Matrix som_activation(const Matrix& sq_dist, double sharpness) {
    Matrix a(sq_dist.rows(), sq_dist.cols());
    for (Eigen::Index i = 0; i < sq_dist.rows(); ++i) {
        const double dmin = sq_dist.row(i).minCoeff();
        const double scale = std::max(dmin, 1e-12);
        a.row(i) = (-sharpness * (sq_dist.row(i).array() - dmin) / scale).exp();
        a.row(i) /= a.row(i).sum();
    }
    return a;
}

// SOM hidden layer with a softmax readout, novelty-gated updates and full
// storage of past sessions; the STM variant routes novel examples through a
// bounded buffer that is replayed during periodic sleep phases.
class GeppNetLearner : public Learner {
public:
    GeppNetLearner(LearnerShape shape, GeppNetConfig config, std::uint64_t seed)
        : Learner(shape), config_(config), seed_(seed) {
        config_.validate();
        const double tau = std::max<double>(1.0, static_cast<double>(config_.base_iterations));
        som_ = SomLattice(config_.rows, config_.cols, shape.input_dim, SomSchedule{config_.som_learning_rate, -1.0, tau});
        readout_ = nn::DenseLayer::zeros(shape.num_classes, som_.units());
        known_.assign(static_cast<std::size_t>(shape.num_classes), false);
    }

    std::string id() const override { return config_.variant == Variant::STM ? "geppnet_stm" : "geppnet"; }

    MemoryLedger memory() const override {
        const std::size_t model = (static_cast<std::size_t>(som_.weights().size()) + readout_.size()) * sizeof(double);
        const std::size_t stored = static_cast<std::size_t>(stored_x_.size()) * sizeof(double) + stored_y_.size() * sizeof(int);
        const std::size_t stm = stm_.size() * (static_cast<std::size_t>(shape().input_dim) * sizeof(double) + sizeof(int));
        return {model, stored + stm};
    }

    const SomLattice& som() const { return som_; }
    const nn::DenseLayer& readout() const { return readout_; }
    const GeppNetConfig& config() const { return config_; }
    long readout_updates() const { return readout_updates_; }
    int sleeps() const { return sleeps_; }
    int last_session_sleeps() const { return last_session_sleeps_; }
    std::size_t stm_size() const { return stm_.size(); }
    Eigen::Index stored_rows() const { return stored_x_.rows(); }

    // Readout probabilities over the classes seen so far.
    Matrix probabilities(const Matrix& x) const {
        Matrix z = scores(x);
        const auto& seen = seen_classes();
        for (Eigen::Index c = 0; c < z.cols(); ++c) {
            if (!seen[static_cast<std::size_t>(c)]) z.col(c).setConstant(-std::numeric_limits<double>::infinity());
        }
        return nn::softmax(z);
    }

    double confidence(const RowVector& x) const {
        const Matrix p = probabilities(Matrix(x));
        const auto& seen = seen_classes();
        RowVector probs(std::count(seen.begin(), seen.end(), true));
        Eigen::Index k = 0;
        for (Eigen::Index c = 0; c < p.cols(); ++c) {
            if (seen[static_cast<std::size_t>(c)]) probs(k++) = p(0, c);
        }
        return confidence_gap(probs);
    }

protected:
    void learn(const data::StudySession& session) override {
        last_session_sleeps_ = 0;
        if (session.id == 1) {
            train_base(session);
        } else {
            train_incremental(session);
        }
        append_storage(session);
    }

    // Only classes with at least one readout update can be predicted.
    Labels infer(const Matrix& x) const override { return nn::argmax_rows(scores(x), known_); }

private:
    Matrix scores(const Matrix& x) const {
        const Matrix a = som_activation(som_.squared_distances(x), config_.activation_sharpness);
        return nn::affine(readout_, a);
    }

    // Least-mean-squares delta rule towards the one-hot target, restricted to
    // classes seen so far. The bias is never trained: with batch-1 updates it
    // tracks the most recent labels.
    void readout_update(const RowVector& x, int label) {
        const Matrix a = som_activation(som_.squared_distances(Matrix(x)), config_.activation_sharpness);
        RowVector err = -nn::affine(readout_, a).row(0);
        const auto& seen = seen_classes();
        for (Eigen::Index c = 0; c < err.size(); ++c) {
            if (!seen[static_cast<std::size_t>(c)]) err(c) = 0.0;
        }
        err(label) += 1.0;
        const double lr = config_.readout_learning_rate;
        readout_.weight.noalias() += lr * err.transpose() * a.row(0);
        known_[static_cast<std::size_t>(label)] = true;
        ++readout_updates_;
    }

    void train_base(const data::StudySession& session) {
        Rng rng = make_rng(seed_, "geppnet-base");
        const auto n = static_cast<std::size_t>(session.train_x.rows());
        if (n == 0) throw InputError(id() + ": empty base session");
        std::uniform_int_distribution<std::size_t> any(0, n - 1);
        for (Eigen::Index u = 0; u < som_.weights().rows(); ++u) som_.weights().row(u) = session.train_x.row(static_cast<Eigen::Index>(any(rng)));

        const long som_only = std::lround(config_.som_init_fraction * static_cast<double>(config_.base_iterations));
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::size_t cursor = n;
        auto next = [&]() {
            if (cursor == n) {
                std::shuffle(order.begin(), order.end(), rng);
                cursor = 0;
            }
            return static_cast<Eigen::Index>(order[cursor++]);
        };
        for (long it = 0; it < config_.base_iterations; ++it) {
            const Eigen::Index i = next();
            const RowVector x = session.train_x.row(i);
            som_.update(x);
            if (it >= som_only) readout_update(x, session.train_y[static_cast<std::size_t>(i)]);
        }
    }

    void train_incremental(const data::StudySession& session) {
        Rng rng = make_rng(seed_, "geppnet-session-" + std::to_string(session.id));
        const auto n_old = static_cast<std::size_t>(stored_x_.rows());
        const auto n_new = static_cast<std::size_t>(session.train_x.rows());
        const std::size_t total = n_old + n_new;
        if (total == 0) return;
        std::uniform_int_distribution<std::size_t> pick(0, total - 1);
        const bool stm = config_.variant == Variant::STM;
        for (long it = 1; it <= config_.incremental_iterations; ++it) {
            const std::size_t k = pick(rng);
            RowVector x;
            int y = 0;
            if (k < n_old) {
                x = stored_x_.row(static_cast<Eigen::Index>(k));
                y = stored_y_[k];
            } else {
                x = session.train_x.row(static_cast<Eigen::Index>(k - n_old));
                y = session.train_y[k - n_old];
            }
            const bool novel = confidence(x) < config_.novelty_threshold;
            if (novel) {
                if (stm) {
                    stm_.emplace_back(std::move(x), y);
                    if (static_cast<int>(stm_.size()) > config_.stm_capacity) stm_.pop_front();
                } else {
                    som_.update(x);
                    readout_update(x, y);
                }
            } else {
                som_.tick();
            }
            if (stm && it % config_.sleep_interval == 0) sleep();
        }
        stm_.clear();
    }

    // Replays the STM buffer through the SOM and readout.
    void sleep() {
        for (const auto& [x, y] : stm_) {
            som_.update(x);
            readout_update(x, y);
        }
        ++sleeps_;
        ++last_session_sleeps_;
    }

    void append_storage(const data::StudySession& session) {
        const Eigen::Index old = stored_x_.rows();
        Matrix grown(old + session.train_x.rows(), shape().input_dim);
        if (old > 0) grown.topRows(old) = stored_x_;
        grown.bottomRows(session.train_x.rows()) = session.train_x;
        stored_x_ = std::move(grown);
        stored_y_.insert(stored_y_.end(), session.train_y.begin(), session.train_y.end());
    }

    GeppNetConfig config_;
    std::uint64_t seed_;
    SomLattice som_;
    nn::DenseLayer readout_;
    std::vector<bool> known_;
    Matrix stored_x_;
    Labels stored_y_;
    std::deque<std::pair<RowVector, int>> stm_;
    long readout_updates_ = 0;
    int sleeps_ = 0;
    int last_session_sleeps_ = 0;
};

}  // namespace forgetbench::geppnet
