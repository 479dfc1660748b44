#pragma once

#include "forgetbench/core/error.hpp"
#include "forgetbench/core/types.hpp"

#include <string>
#include <vector>

namespace forgetbench {

// Unweighted mean over `classes` of the per-class hit rate.
inline double mean_per_class_accuracy(const Labels& predictions, const Labels& labels, const std::vector<int>& classes) {
    if (predictions.size() != labels.size()) throw ShapeError("prediction and label counts differ");
    if (classes.empty()) throw EvaluationError("mean-per-class accuracy needs a nonempty class set");
    double total = 0.0;
    for (int c : classes) {
        std::size_t seen = 0;
        std::size_t hit = 0;
        for (std::size_t i = 0; i < labels.size(); ++i) {
            if (labels[i] != c) continue;
            ++seen;
            if (predictions[i] == c) ++hit;
        }
        if (seen == 0) throw EvaluationError("class " + std::to_string(c) + " has no test examples");
        total += static_cast<double>(hit) / static_cast<double>(seen);
    }
    return total / static_cast<double>(classes.size());
}

inline double accuracy(const Labels& predictions, const Labels& labels) {
    if (predictions.size() != labels.size()) throw ShapeError("prediction and label counts differ");
    if (labels.empty()) return 0.0;
    std::size_t hit = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) hit += predictions[i] == labels[i] ? 1 : 0;
    return static_cast<double>(hit) / static_cast<double>(labels.size());
}

}  // namespace forgetbench
