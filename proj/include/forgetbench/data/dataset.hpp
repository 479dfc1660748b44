#pragma once

#include "forgetbench/core/error.hpp"
#include "forgetbench/core/rng.hpp"
#include "forgetbench/core/types.hpp"

#include <algorithm>
#include <filesystem>
#include <string>
#include <vector>

namespace forgetbench::data {

// Last path component, ignoring a trailing separator ("data/mnist/" -> "mnist").
inline std::string dataset_name(const std::filesystem::path& path) {
    auto p = std::filesystem::absolute(path).lexically_normal();
    if (p.filename().empty()) p = p.parent_path();
    return p.filename().string();
}

struct Dataset {
    std::string name;
    Matrix features;  // [N x d]
    Labels labels;    // [N], each in [0, num_classes)
    int num_classes = 0;

    Eigen::Index size() const { return features.rows(); }
    Eigen::Index dim() const { return features.cols(); }

    // Row indices per class, in ascending row order.
    std::vector<std::vector<std::size_t>> class_indices() const {
        std::vector<std::vector<std::size_t>> out(static_cast<std::size_t>(num_classes));
        for (std::size_t i = 0; i < labels.size(); ++i) out[static_cast<std::size_t>(labels[i])].push_back(i);
        return out;
    }

    void validate() const {
        if (static_cast<Eigen::Index>(labels.size()) != features.rows()) {
            throw DataError(name + ": " + std::to_string(labels.size()) + " labels for " +
                            std::to_string(features.rows()) + " rows");
        }
        for (std::size_t i = 0; i < labels.size(); ++i) {
            if (labels[i] < 0 || labels[i] >= num_classes) {
                throw DataError(name + ": label " + std::to_string(labels[i]) + " at row " + std::to_string(i) +
                                " outside [0, " + std::to_string(num_classes) + ")");
            }
        }
    }

    Dataset subset(const std::vector<std::size_t>& rows) const {
        return {name, take_rows(features, rows), take(labels, rows), num_classes};
    }
};

struct DatasetSplit {
    Dataset train;
    Dataset test;

    std::string name() const { return train.name; }
    int num_classes() const { return std::max(train.num_classes, test.num_classes); }

    // Every class must appear in both halves.
    void validate() const {
        train.validate();
        test.validate();
        if (train.dim() != test.dim()) throw DataError(name() + ": train and test feature widths differ");
        const auto tr = train.class_indices();
        const auto te = test.class_indices();
        for (int c = 0; c < num_classes(); ++c) {
            const auto k = static_cast<std::size_t>(c);
            if (k >= tr.size() || tr[k].empty()) throw DataError(name() + ": class " + std::to_string(c) + " has no training examples");
            if (k >= te.size() || te[k].empty()) throw DataError(name() + ": class " + std::to_string(c) + " has no test examples");
        }
    }
};

// Stratified holdout: `fraction` of each class (at least one example when the
// class has two or more) goes to the second set.
inline std::pair<std::vector<std::size_t>, std::vector<std::size_t>> stratified_holdout(const Labels& labels,
                                                                                         double fraction, Rng& rng) {
    int classes = 0;
    for (int y : labels) classes = std::max(classes, y + 1);
    std::vector<std::vector<std::size_t>> by_class(static_cast<std::size_t>(classes));
    for (std::size_t i = 0; i < labels.size(); ++i) by_class[static_cast<std::size_t>(labels[i])].push_back(i);
    std::vector<std::size_t> keep;
    std::vector<std::size_t> held;
    for (auto& rows : by_class) {
        if (rows.empty()) continue;
        std::shuffle(rows.begin(), rows.end(), rng);
        std::size_t n_held = static_cast<std::size_t>(fraction * static_cast<double>(rows.size()) + 0.5);
        if (rows.size() >= 2) n_held = std::clamp<std::size_t>(n_held, 1, rows.size() - 1);
        else n_held = 0;
        held.insert(held.end(), rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(n_held));
        keep.insert(keep.end(), rows.begin() + static_cast<std::ptrdiff_t>(n_held), rows.end());
    }
    std::sort(keep.begin(), keep.end());
    std::sort(held.begin(), held.end());
    return {keep, held};
}

inline DatasetSplit train_test_split(const Dataset& ds, double test_fraction, std::uint64_t seed) {
    Rng rng = make_rng(seed, "split");
    auto [train_rows, test_rows] = stratified_holdout(ds.labels, test_fraction, rng);
    DatasetSplit split{ds.subset(train_rows), ds.subset(test_rows)};
    split.train.num_classes = split.test.num_classes = ds.num_classes;
    return split;
}

// Seeded per-class sample of at most `per_class` rows, kept in row order.
inline Dataset sample_per_class(const Dataset& ds, std::size_t per_class, std::uint64_t seed) {
    Rng rng = make_rng(seed, "sample-" + ds.name);
    std::vector<std::size_t> rows;
    for (auto idx : ds.class_indices()) {
        std::shuffle(idx.begin(), idx.end(), rng);
        if (idx.size() > per_class) idx.resize(per_class);
        rows.insert(rows.end(), idx.begin(), idx.end());
    }
    std::sort(rows.begin(), rows.end());
    return ds.subset(rows);
}

inline DatasetSplit sample_per_class(const DatasetSplit& split, std::size_t train_per_class, std::size_t test_per_class,
                                     std::uint64_t seed) {
    DatasetSplit out{sample_per_class(split.train, train_per_class, derive_seed(seed, "train")),
                     sample_per_class(split.test, test_per_class, derive_seed(seed, "test"))};
    out.train.num_classes = out.test.num_classes = split.num_classes();
    return out;
}

}  // namespace forgetbench::data
