#pragma once

#include "forgetbench/core/error.hpp"
#include "forgetbench/core/rng.hpp"
#include "forgetbench/core/types.hpp"

#include <algorithm>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace forgetbench::nn {

enum class StopMetric { ValidationAccuracy, ValidationLoss };

inline StopMetric stop_metric_from_string(std::string_view name) {
    if (name == "accuracy" || name == "val_accuracy") return StopMetric::ValidationAccuracy;
    if (name == "loss" || name == "val_loss") return StopMetric::ValidationLoss;
    throw ConfigError("unknown early-stopping metric '" + std::string(name) + "'");
}

struct TrainConfig {
    int batch_size = 256;
    int max_epochs = 100;
    int patience = 10;
    StopMetric monitor = StopMetric::ValidationAccuracy;
    std::uint64_t seed = 0;

    void validate() const {
        if (batch_size < 1) throw ConfigError("batch size must be >= 1");
        if (patience < 1) throw ConfigError("early-stopping patience must be >= 1");
        if (max_epochs < 1) throw ConfigError("max epochs must be >= 1");
    }
};

struct ValidationScore {
    double accuracy = 0.0;
    double loss = 0.0;
};

struct EpochLog {
    int epoch = 0;
    double train_loss = 0.0;
    std::optional<ValidationScore> validation;
};

template <class Model>
struct TrainResult {
    Model model;
    std::vector<EpochLog> epochs;
    int best_epoch = 0;
};

// Mini-batch training with early stopping on a validation split.
//
// `step(model, xb, yb)` performs one optimizer update and returns the batch
// loss. `score(model, vx, vy)` returns a ValidationScore. The returned model
// is the snapshot from the best validation epoch; without validation data the
// final model is returned after max_epochs. The shuffle order depends only on
// cfg.seed.
template <class Model, class StepFn, class ScoreFn>
TrainResult<Model> train(Model model, const Matrix& x, const Labels& y, const Matrix& val_x, const Labels& val_y,
                         const TrainConfig& cfg, StepFn&& step, ScoreFn&& score) {
    cfg.validate();
    if (x.rows() == 0) throw InputError("cannot train on an empty data set");
    if (static_cast<Eigen::Index>(y.size()) != x.rows()) throw ShapeError("feature and label counts differ");

    Rng rng = make_rng(cfg.seed, "shuffle");
    std::vector<std::size_t> order(static_cast<std::size_t>(x.rows()));
    std::iota(order.begin(), order.end(), std::size_t{0});

    const bool has_val = val_x.rows() > 0;
    TrainResult<Model> result{model, {}, 0};
    double best = -std::numeric_limits<double>::infinity();
    int since_best = 0;

    for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        double loss_sum = 0.0;
        std::size_t batches = 0;
        for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(cfg.batch_size)) {
            const std::size_t stop = std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
            std::vector<std::size_t> rows(order.begin() + static_cast<std::ptrdiff_t>(start),
                                          order.begin() + static_cast<std::ptrdiff_t>(stop));
            loss_sum += step(model, take_rows(x, rows), take(y, rows));
            ++batches;
        }
        EpochLog log{epoch, loss_sum / static_cast<double>(batches), std::nullopt};
        if (has_val) {
            const ValidationScore s = score(static_cast<const Model&>(model), val_x, val_y);
            log.validation = s;
            const double metric = cfg.monitor == StopMetric::ValidationAccuracy ? s.accuracy : -s.loss;
            if (metric > best) {
                best = metric;
                since_best = 0;
                result.model = model;
                result.best_epoch = epoch;
            } else if (++since_best >= cfg.patience) {
                result.epochs.push_back(log);
                break;
            }
        }
        result.epochs.push_back(log);
    }
    if (!has_val) {
        result.model = std::move(model);
        result.best_epoch = static_cast<int>(result.epochs.size());
    }
    return result;
}

}  // namespace forgetbench::nn
