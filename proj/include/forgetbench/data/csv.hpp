#pragma once

#include "forgetbench/core/error.hpp"
#include "forgetbench/data/dataset.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

namespace forgetbench::data {

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

template <class T>
T parse_cell(std::string_view cell, const std::filesystem::path& path, std::size_t line, std::size_t column) {
    cell = trim(cell);
    T value{};
    const auto* end = cell.data() + cell.size();
    auto [ptr, ec] = std::from_chars(cell.data(), end, value);
    if (cell.empty() || ec != std::errc{} || ptr != end) {
        throw FormatError(path.string() + ":" + std::to_string(line) + ": column " + std::to_string(column) +
                          " is not numeric ('" + std::string(cell) + "')");
    }
    return value;
}

}  // namespace detail

// Rows of `label,f0,...,f{d-1}`. Blank lines are skipped; num_classes is the
// largest label plus one.
inline Dataset load_csv_features(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw FormatError(path.string() + ": cannot open");

    std::vector<double> values;
    Labels labels;
    std::ptrdiff_t dim = -1;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view rest = detail::trim(line);
        if (rest.empty()) continue;
        std::size_t column = 0;
        std::ptrdiff_t width = 0;
        while (true) {
            const auto comma = rest.find(',');
            const auto cell = rest.substr(0, comma);
            if (column == 0) {
                const int y = detail::parse_cell<int>(cell, path, line_no, column);
                if (y < 0) throw FormatError(path.string() + ":" + std::to_string(line_no) + ": negative label");
                labels.push_back(y);
            } else {
                values.push_back(detail::parse_cell<double>(cell, path, line_no, column));
                ++width;
            }
            ++column;
            if (comma == std::string_view::npos) break;
            rest.remove_prefix(comma + 1);
        }
        if (dim < 0) {
            if (width == 0) throw FormatError(path.string() + ":" + std::to_string(line_no) + ": row has no features");
            dim = width;
        } else if (width != dim) {
            throw FormatError(path.string() + ":" + std::to_string(line_no) + ": expected " + std::to_string(dim) +
                              " features, found " + std::to_string(width));
        }
    }
    if (labels.empty()) throw FormatError(path.string() + ": no data rows");

    Dataset ds;
    ds.name = path.stem().string();
    ds.features.resize(static_cast<Eigen::Index>(labels.size()), dim);
    for (Eigen::Index i = 0; i < ds.features.rows(); ++i) {
        for (Eigen::Index j = 0; j < dim; ++j) ds.features(i, j) = values[static_cast<std::size_t>(i * dim + j)];
    }
    ds.labels = std::move(labels);
    for (int y : ds.labels) ds.num_classes = std::max(ds.num_classes, y + 1);
    return ds;
}

inline bool is_csv_directory(const std::filesystem::path& dir) {
    return std::filesystem::exists(dir / "train.csv") && std::filesystem::exists(dir / "test.csv");
}

// A directory holding train.csv and test.csv.
inline DatasetSplit load_csv_directory(const std::filesystem::path& dir) {
    DatasetSplit split{load_csv_features(dir / "train.csv"), load_csv_features(dir / "test.csv")};
    split.train.name = split.test.name = dataset_name(dir);
    split.train.num_classes = split.test.num_classes = split.num_classes();
    if (split.train.dim() != split.test.dim()) {
        throw FormatError(dir.string() + ": train.csv and test.csv have different feature counts");
    }
    return split;
}

inline void write_csv_features(const std::filesystem::path& path, const Dataset& ds) {
    std::ofstream out(path);
    if (!out) throw InputError(path.string() + ": cannot write");
    out.precision(17);
    for (Eigen::Index i = 0; i < ds.size(); ++i) {
        out << ds.labels[static_cast<std::size_t>(i)];
        for (Eigen::Index j = 0; j < ds.dim(); ++j) out << ',' << ds.features(i, j);
        out << '\n';
    }
}

}  // namespace forgetbench::data
