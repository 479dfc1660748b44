#pragma once

#include "forgetbench/core/error.hpp"
#include "forgetbench/core/rng.hpp"
#include "forgetbench/data/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <string>
#include <variant>
#include <vector>

namespace forgetbench::data {

enum class Protocol { Permutation, IncrementalClass, MultiModal };

inline std::string to_string(Protocol p) {
    switch (p) {
        case Protocol::Permutation: return "permutation";
        case Protocol::IncrementalClass: return "incremental-class";
        case Protocol::MultiModal: return "multimodal";
    }
    return "?";
}

inline Protocol protocol_from_string(const std::string& name) {
    if (name == "permutation") return Protocol::Permutation;
    if (name == "incremental-class" || name == "incremental") return Protocol::IncrementalClass;
    if (name == "multimodal" || name == "multi-modal") return Protocol::MultiModal;
    throw ConfigError("unknown protocol '" + name + "' (expected permutation, incremental-class or multimodal)");
}

struct PermutationSession {
    int permutation_id = 0;
    std::vector<int> permutation;  // output column j takes input column permutation[j]
};

struct ClassSetSession {
    std::vector<int> classes;
};

struct ModalitySession {
    std::string dataset;
};

using SessionDescriptor = std::variant<PermutationSession, ClassSetSession, ModalitySession>;

// One labeled batch of the incremental stream and its matching test data.
struct StudySession {
    int id = 0;  // 1-based
    Matrix train_x;
    Labels train_y;
    Matrix test_x;
    Labels test_y;
    std::vector<int> classes;  // sorted label set of this session
    SessionDescriptor descriptor;

    Eigen::Index dim() const { return train_x.cols(); }
};

struct SessionStream {
    Protocol protocol = Protocol::Permutation;
    std::string dataset;
    int input_dim = 0;
    int num_classes = 0;
    std::vector<StudySession> sessions;

    int size() const { return static_cast<int>(sessions.size()); }
};

namespace detail {

inline std::vector<int> label_set(const Labels& y) {
    std::set<int> s(y.begin(), y.end());
    return {s.begin(), s.end()};
}

inline Matrix permute_columns(const Matrix& x, const std::vector<int>& perm) {
    Matrix out(x.rows(), x.cols());
    for (Eigen::Index j = 0; j < x.cols(); ++j) out.col(j) = x.col(perm[static_cast<std::size_t>(j)]);
    return out;
}

inline std::vector<std::size_t> rows_with_labels(const Labels& y, const std::vector<int>& classes) {
    std::vector<bool> want;
    for (int c : classes) {
        if (static_cast<std::size_t>(c) >= want.size()) want.resize(static_cast<std::size_t>(c) + 1, false);
        want[static_cast<std::size_t>(c)] = true;
    }
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const auto c = static_cast<std::size_t>(y[i]);
        if (c < want.size() && want[c]) rows.push_back(i);
    }
    return rows;
}

inline Matrix pad_columns(const Matrix& x, Eigen::Index width) {
    Matrix out = Matrix::Zero(x.rows(), width);
    out.leftCols(x.cols()) = x;
    return out;
}

}  // namespace detail

// Session 1 is the original data; each later session applies its own fixed
// random feature permutation to every train and test vector.
inline SessionStream make_permutation_stream(const DatasetSplit& ds, int sessions, std::uint64_t seed) {
    if (sessions < 2) throw ConfigError("the permutation protocol needs at least 2 sessions");
    const auto dim = static_cast<int>(ds.train.dim());
    Rng rng = make_rng(seed, "permutation");
    SessionStream stream{Protocol::Permutation, ds.name(), dim, ds.num_classes(), {}};
    const auto classes = detail::label_set(ds.train.labels);
    for (int t = 1; t <= sessions; ++t) {
        std::vector<int> perm(static_cast<std::size_t>(dim));
        std::iota(perm.begin(), perm.end(), 0);
        if (t > 1) std::shuffle(perm.begin(), perm.end(), rng);
        StudySession s;
        s.id = t;
        s.train_x = t == 1 ? ds.train.features : detail::permute_columns(ds.train.features, perm);
        s.test_x = t == 1 ? ds.test.features : detail::permute_columns(ds.test.features, perm);
        s.train_y = ds.train.labels;
        s.test_y = ds.test.labels;
        s.classes = classes;
        s.descriptor = PermutationSession{t - 1, std::move(perm)};
        stream.sessions.push_back(std::move(s));
    }
    return stream;
}

struct ClassOrder {
    bool shuffle = false;
    std::uint64_t seed = 0;
};

// Number of classes in the base session: ceil(C * base_fraction).
inline int base_class_count(int num_classes, double base_fraction) {
    const int base = static_cast<int>(std::ceil(num_classes * base_fraction - 1e-9));
    if (base < 1 || base >= num_classes) {
        throw ConfigError("base fraction " + std::to_string(base_fraction) + " gives " + std::to_string(base) +
                          " base classes out of " + std::to_string(num_classes) + "; need 1..C-1");
    }
    return base;
}

// Session 1 holds the first ceil(C * base_fraction) classes; every later
// session holds exactly one new class.
inline SessionStream make_class_incremental_stream(const DatasetSplit& ds, double base_fraction = 0.5,
                                                   ClassOrder order = {}) {
    const int C = ds.num_classes();
    const int base = base_class_count(C, base_fraction);
    const auto train_idx = ds.train.class_indices();
    const auto test_idx = ds.test.class_indices();
    for (int c = 0; c < C; ++c) {
        const auto k = static_cast<std::size_t>(c);
        if (k >= train_idx.size() || train_idx[k].empty()) throw DataError("class " + std::to_string(c) + " has no training data");
        if (k >= test_idx.size() || test_idx[k].empty()) throw DataError("class " + std::to_string(c) + " has no test data");
    }
    std::vector<int> classes(static_cast<std::size_t>(C));
    std::iota(classes.begin(), classes.end(), 0);
    if (order.shuffle) {
        Rng rng = make_rng(order.seed, "class-order");
        std::shuffle(classes.begin(), classes.end(), rng);
    }

    SessionStream stream{Protocol::IncrementalClass, ds.name(), static_cast<int>(ds.train.dim()), C, {}};
    auto add = [&](int id, std::vector<int> members) {
        std::sort(members.begin(), members.end());
        const auto tr = detail::rows_with_labels(ds.train.labels, members);
        const auto te = detail::rows_with_labels(ds.test.labels, members);
        StudySession s;
        s.id = id;
        s.train_x = take_rows(ds.train.features, tr);
        s.train_y = take(ds.train.labels, tr);
        s.test_x = take_rows(ds.test.features, te);
        s.test_y = take(ds.test.labels, te);
        s.classes = members;
        s.descriptor = ClassSetSession{std::move(members)};
        stream.sessions.push_back(std::move(s));
    };
    add(1, {classes.begin(), classes.begin() + base});
    for (int k = base; k < C; ++k) add(k - base + 2, {classes[static_cast<std::size_t>(k)]});
    return stream;
}

// Two sessions: all of `first`, then all of `second`. The narrower input is
// zero-padded on the right and the second label space is offset by the
// first dataset's class count.
inline SessionStream make_multimodal_stream(const DatasetSplit& first, const DatasetSplit& second) {
    const Eigen::Index width = std::max(first.train.dim(), second.train.dim());
    const int offset = first.num_classes();
    SessionStream stream{Protocol::MultiModal, first.name() + "+" + second.name(), static_cast<int>(width),
                         offset + second.num_classes(), {}};
    auto add = [&](int id, const DatasetSplit& ds, int label_offset) {
        StudySession s;
        s.id = id;
        s.train_x = detail::pad_columns(ds.train.features, width);
        s.test_x = detail::pad_columns(ds.test.features, width);
        s.train_y = ds.train.labels;
        s.test_y = ds.test.labels;
        for (auto& y : s.train_y) y += label_offset;
        for (auto& y : s.test_y) y += label_offset;
        s.classes = detail::label_set(s.train_y);
        s.descriptor = ModalitySession{ds.name()};
        stream.sessions.push_back(std::move(s));
    };
    add(1, first, 0);
    add(2, second, offset);
    return stream;
}

}  // namespace forgetbench::data
