#pragma once

#include "forgetbench/core/error.hpp"
#include "forgetbench/core/rng.hpp"
#include "forgetbench/data/dataset.hpp"

#include <random>
#include <string>

namespace forgetbench::data {

// Isotropic Gaussian clusters. Class means are drawn from N(0, 1) per
// coordinate; samples are mean + spread * N(0, 1). Rows are grouped by class.
inline Dataset synth_blobs(int classes, int per_class, int dim, double spread, std::uint64_t seed) {
    if (classes <= 0 || per_class <= 0 || dim <= 0 || spread < 0.0) {
        throw InputError("synth_blobs: class count, size and dimension must be positive");
    }
    Rng rng = make_rng(seed, "blobs");
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix means(classes, dim);
    for (Eigen::Index c = 0; c < classes; ++c) {
        for (Eigen::Index j = 0; j < dim; ++j) means(c, j) = normal(rng);
    }
    Dataset ds;
    ds.name = "blobs";
    ds.num_classes = classes;
    ds.features.resize(static_cast<Eigen::Index>(classes) * per_class, dim);
    ds.labels.reserve(static_cast<std::size_t>(classes) * static_cast<std::size_t>(per_class));
    Eigen::Index row = 0;
    for (int c = 0; c < classes; ++c) {
        for (int i = 0; i < per_class; ++i, ++row) {
            for (Eigen::Index j = 0; j < dim; ++j) ds.features(row, j) = means(c, j) + spread * normal(rng);
            ds.labels.push_back(c);
        }
    }
    return ds;
}

}  // namespace forgetbench::data
