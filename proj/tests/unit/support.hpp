#pragma once

#include "forgetbench/forgetbench.hpp"

#include <cmath>
#include <filesystem>
#include <functional>
#include <random>
#include <string>

namespace fbtest {

using namespace forgetbench;

inline std::filesystem::path source_path(const std::string& rel) { return std::filesystem::path(FORGETBENCH_SOURCE_DIR) / rel; }

inline std::filesystem::path temp_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("forgetbench_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

inline Matrix random_matrix(Eigen::Index r, Eigen::Index c, Rng& rng, double scale = 1.0) {
    std::normal_distribution<double> n(0.0, scale);
    Matrix m(r, c);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = n(rng);
    return m;
}

inline Labels random_labels(Eigen::Index n, int classes, Rng& rng) {
    std::uniform_int_distribution<int> pick(0, classes - 1);
    Labels y(static_cast<std::size_t>(n));
    for (auto& v : y) v = pick(rng);
    return y;
}

// Central difference of f with respect to *p.
inline double central_difference(double* p, const std::function<double()>& f, double h = 1e-6) {
    const double keep = *p;
    *p = keep + h;
    const double up = f();
    *p = keep - h;
    const double down = f();
    *p = keep;
    return (up - down) / (2.0 * h);
}

inline double relative_error(double a, double b) { return std::abs(a - b) / std::max({1e-8, std::abs(a), std::abs(b)}); }

inline data::DatasetSplit blobs_split(int classes, int per_class, int dim, double spread, std::uint64_t seed) {
    return data::train_test_split(data::synth_blobs(classes, per_class, dim, spread, seed), 0.25, seed);
}

}  // namespace fbtest
