#pragma once

#include "forgetbench/core/error.hpp"
#include "forgetbench/data/dataset.hpp"

#include <zlib.h>

#include <array>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

namespace forgetbench::data {

namespace detail {

// Reads a whole file, transparently inflating gzip content.
inline std::vector<unsigned char> read_maybe_gzip(const std::filesystem::path& path) {
    std::unique_ptr<gzFile_s, int (*)(gzFile)> file(gzopen(path.string().c_str(), "rb"), gzclose);
    if (!file) throw FormatError(path.string() + ": cannot open");
    std::vector<unsigned char> bytes;
    std::array<unsigned char, 1 << 16> chunk{};
    int got = 0;
    while ((got = gzread(file.get(), chunk.data(), static_cast<unsigned>(chunk.size()))) > 0) {
        bytes.insert(bytes.end(), chunk.begin(), chunk.begin() + got);
    }
    if (got < 0) throw FormatError(path.string() + ": read error after byte offset " + std::to_string(bytes.size()));
    return bytes;
}

inline std::uint32_t read_be32(const std::vector<unsigned char>& bytes, std::size_t offset,
                               const std::filesystem::path& path) {
    if (offset + 4 > bytes.size()) {
        throw FormatError(path.string() + ": truncated IDX header at byte offset " + std::to_string(offset));
    }
    return (std::uint32_t{bytes[offset]} << 24) | (std::uint32_t{bytes[offset + 1]} << 16) |
           (std::uint32_t{bytes[offset + 2]} << 8) | std::uint32_t{bytes[offset + 3]};
}

}  // namespace detail

inline constexpr std::uint32_t kIdxImageMagic = 0x00000803;
inline constexpr std::uint32_t kIdxLabelMagic = 0x00000801;

// Loads an IDX3 unsigned-byte image file and its IDX1 label file. Pixels are
// scaled to [0, 1]; each image is flattened row-major.
inline Dataset load_idx(const std::filesystem::path& images_path, const std::filesystem::path& labels_path) {
    const auto images = detail::read_maybe_gzip(images_path);
    const auto labels = detail::read_maybe_gzip(labels_path);

    const auto image_magic = detail::read_be32(images, 0, images_path);
    if (image_magic != kIdxImageMagic) {
        throw FormatError(images_path.string() + ": bad IDX image magic at byte offset 0");
    }
    const auto n = detail::read_be32(images, 4, images_path);
    const auto rows = detail::read_be32(images, 8, images_path);
    const auto cols = detail::read_be32(images, 12, images_path);
    const std::size_t dim = std::size_t{rows} * cols;
    const std::size_t expected = 16 + std::size_t{n} * dim;
    if (images.size() < expected) {
        throw FormatError(images_path.string() + ": truncated pixel data at byte offset " +
                          std::to_string(images.size()) + " (expected " + std::to_string(expected) + " bytes)");
    }

    if (detail::read_be32(labels, 0, labels_path) != kIdxLabelMagic) {
        throw FormatError(labels_path.string() + ": bad IDX label magic at byte offset 0");
    }
    const auto n_labels = detail::read_be32(labels, 4, labels_path);
    if (n_labels != n) {
        throw FormatError(labels_path.string() + ": " + std::to_string(n_labels) + " labels for " +
                          std::to_string(n) + " images (byte offset 4)");
    }
    if (labels.size() < 8 + std::size_t{n}) {
        throw FormatError(labels_path.string() + ": truncated label data at byte offset " +
                          std::to_string(labels.size()));
    }

    Dataset ds;
    ds.name = dataset_name(images_path.parent_path());
    ds.features.resize(n, static_cast<Eigen::Index>(dim));
    ds.labels.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const unsigned char* px = images.data() + 16 + i * dim;
        for (std::size_t j = 0; j < dim; ++j) {
            ds.features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = px[j] / 255.0;
        }
        ds.labels[i] = labels[8 + i];
        ds.num_classes = std::max(ds.num_classes, ds.labels[i] + 1);
    }
    return ds;
}

namespace detail {
inline std::filesystem::path find_idx(const std::filesystem::path& dir, const std::string& stem) {
    for (const char* suffix : {"", ".gz"}) {
        auto p = dir / (stem + suffix);
        if (std::filesystem::exists(p)) return p;
    }
    throw FormatError((dir / stem).string() + "[.gz]: not found");
}
}  // namespace detail

inline bool is_idx_directory(const std::filesystem::path& dir) {
    return std::filesystem::exists(dir / "train-images-idx3-ubyte") ||
           std::filesystem::exists(dir / "train-images-idx3-ubyte.gz");
}

// Standard MNIST file names. The training set is cut to its first
// `train_limit` rows; the canonical 60k file keeps 50,000 and the remaining
// 10,000 serve as the usual validation holdout.
inline DatasetSplit load_mnist_directory(const std::filesystem::path& dir, std::size_t train_limit = 50000) {
    DatasetSplit split{load_idx(detail::find_idx(dir, "train-images-idx3-ubyte"),
                                detail::find_idx(dir, "train-labels-idx1-ubyte")),
                       load_idx(detail::find_idx(dir, "t10k-images-idx3-ubyte"),
                                detail::find_idx(dir, "t10k-labels-idx1-ubyte"))};
    if (static_cast<std::size_t>(split.train.size()) > train_limit) {
        const auto keep = static_cast<Eigen::Index>(train_limit);
        split.train.features.conservativeResize(keep, Eigen::NoChange);
        split.train.labels.resize(train_limit);
    }
    split.train.name = split.test.name = dataset_name(dir);
    split.train.num_classes = split.test.num_classes = split.num_classes();
    return split;
}

}  // namespace forgetbench::data
