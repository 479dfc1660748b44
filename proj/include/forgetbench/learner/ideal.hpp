#pragma once

#include "forgetbench/learner/accuracy.hpp"
#include "forgetbench/learner/mlp.hpp"

namespace forgetbench {

// Offline reference accuracy: an MLP trained on all of `train_x` at once,
// scored by mean-per-class accuracy on the base-set test data.
inline double train_offline_ideal(const Matrix& train_x, const Labels& train_y, const Matrix& base_test_x,
                                  const Labels& base_test_y, const std::vector<int>& base_classes, int num_classes,
                                  const MlpConfig& config, std::uint64_t seed) {
    MlpLearner mlp({static_cast<int>(train_x.cols()), num_classes}, config, derive_seed(seed, "ideal"));
    data::StudySession all;
    all.id = 1;
    all.train_x = train_x;
    all.train_y = train_y;
    mlp.train_session(all);
    return mean_per_class_accuracy(mlp.predict(base_test_x), base_test_y, base_classes);
}

}  // namespace forgetbench
