#pragma once

#include "forgetbench/core/error.hpp"
#include "forgetbench/data/csv.hpp"
#include "forgetbench/data/idx.hpp"

#include <cstdlib>
#include <filesystem>
#include <string>

namespace forgetbench::data {

inline constexpr const char* kDataRootVariable = "FORGETBENCH_DATA";

// Paths that do not exist as given are looked up under $FORGETBENCH_DATA.
inline std::filesystem::path resolve_data_path(const std::filesystem::path& path) {
    if (path.is_absolute() || std::filesystem::exists(path)) return path;
    if (const char* root = std::getenv(kDataRootVariable); root != nullptr && *root != '\0') {
        auto candidate = std::filesystem::path(root) / path;
        if (std::filesystem::exists(candidate)) return candidate;
    }
    return path;
}

// A dataset directory holds either the four MNIST IDX files or a
// train.csv/test.csv pair.
inline DatasetSplit load_dataset(const std::filesystem::path& given) {
    const auto dir = resolve_data_path(given);
    if (!std::filesystem::is_directory(dir)) {
        throw InputError(given.string() + ": dataset directory not found (also searched $" +
                         std::string(kDataRootVariable) + ")");
    }
    DatasetSplit split;
    if (is_idx_directory(dir)) split = load_mnist_directory(dir);
    else if (is_csv_directory(dir)) split = load_csv_directory(dir);
    else throw FormatError(dir.string() + ": expected MNIST IDX files or train.csv + test.csv");
    split.validate();
    return split;
}

}  // namespace forgetbench::data
