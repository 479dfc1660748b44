#pragma once

#include "forgetbench/core/error.hpp"
#include "forgetbench/core/types.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <string>
#include <unordered_map>
#include <vector>

namespace forgetbench::fcbf {

// Equal-width codes over [min, max]; the maximum lands in the last bin and a
// constant column maps to bin 0.
inline std::vector<int> discretize(const Vector& values, int bins) {
    if (bins < 1) throw ConfigError("bin count must be >= 1");
    std::vector<int> codes(static_cast<std::size_t>(values.size()), 0);
    if (values.size() == 0) return codes;
    const double lo = values.minCoeff();
    const double hi = values.maxCoeff();
    if (!(hi > lo)) return codes;
    const double width = (hi - lo) / bins;
    for (Eigen::Index i = 0; i < values.size(); ++i) {
        codes[static_cast<std::size_t>(i)] = std::min(bins - 1, static_cast<int>((values(i) - lo) / width));
    }
    return codes;
}

inline std::vector<int> label_codes(const Labels& labels) { return std::vector<int>(labels.begin(), labels.end()); }

// Shannon entropy in bits of a discrete code vector.
inline double entropy_codes(const std::vector<int>& codes) {
    if (codes.empty()) return 0.0;
    std::unordered_map<int, std::size_t> counts;
    for (int c : codes) ++counts[c];
    const double n = static_cast<double>(codes.size());
    double h = 0.0;
    for (const auto& [code, count] : counts) {
        const double p = static_cast<double>(count) / n;
        h -= p * std::log2(p);
    }
    return h;
}

inline double entropy(const Vector& values, int bins) {
    if (values.size() == 0) throw InputError("entropy of an empty vector");
    return entropy_codes(discretize(values, bins));
}

// H(X | Y) in bits.
inline double conditional_entropy_codes(const std::vector<int>& x, const std::vector<int>& y) {
    if (x.size() != y.size()) throw InputError("conditional entropy: lengths differ");
    std::unordered_map<int, std::vector<int>> groups;
    for (std::size_t i = 0; i < x.size(); ++i) groups[y[i]].push_back(x[i]);
    const double n = static_cast<double>(x.size());
    double h = 0.0;
    for (const auto& [value, xs] : groups) h += static_cast<double>(xs.size()) / n * entropy_codes(xs);
    return h;
}

// 2 * IG / (H(X) + H(Y)) with IG = H(X) - H(X | Y); 0 when both are constant.
// Clamped to [0, 1] against rounding.
inline double symmetric_uncertainty_codes(const std::vector<int>& x, const std::vector<int>& y) {
    if (x.size() != y.size()) throw InputError("symmetric uncertainty: lengths differ (" + std::to_string(x.size()) + " vs " + std::to_string(y.size()) + ")");
    const double hx = entropy_codes(x);
    const double hy = entropy_codes(y);
    if (hx + hy <= 0.0) return 0.0;
    const double ig = hx - conditional_entropy_codes(x, y);
    return std::clamp(2.0 * ig / (hx + hy), 0.0, 1.0);
}

inline double symmetric_uncertainty(const Vector& x, const Vector& y, int bins) {
    if (x.size() != y.size()) throw InputError("symmetric uncertainty: lengths differ");
    return symmetric_uncertainty_codes(discretize(x, bins), discretize(y, bins));
}

// Faster SU for small code alphabets via a joint histogram; used by the bulk paths.
class CodedColumns {
public:
    CodedColumns(const Matrix& features, int bins) : bins_(bins) {
        codes_.reserve(static_cast<std::size_t>(features.cols()));
        for (Eigen::Index j = 0; j < features.cols(); ++j) {
            codes_.push_back(discretize(features.col(j), bins));
            entropies_.push_back(entropy_codes(codes_.back()));
        }
    }

    std::size_t size() const { return codes_.size(); }
    const std::vector<int>& codes(std::size_t j) const { return codes_[j]; }
    double entropy(std::size_t j) const { return entropies_[j]; }

    double su(std::size_t a, std::size_t b) const {
        return su_with(codes_[a], entropies_[a], codes_[b], entropies_[b], bins_);
    }

    double su_against(std::size_t a, const std::vector<int>& target, double target_entropy, int target_alphabet) const {
        return su_with(codes_[a], entropies_[a], target, target_entropy, target_alphabet);
    }

private:
    static double su_with(const std::vector<int>& x, double hx, const std::vector<int>& y, double hy, int ny) {
        if (hx + hy <= 0.0) return 0.0;
        int nx = 0;
        for (int v : x) nx = std::max(nx, v + 1);
        ny = std::max(ny, 1);
        std::vector<std::size_t> joint(static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny), 0);
        for (std::size_t i = 0; i < x.size(); ++i) ++joint[static_cast<std::size_t>(x[i]) * static_cast<std::size_t>(ny) + static_cast<std::size_t>(y[i])];
        const double n = static_cast<double>(x.size());
        double hxy = 0.0;
        for (std::size_t c : joint) {
            if (c == 0) continue;
            const double p = static_cast<double>(c) / n;
            hxy -= p * std::log2(p);
        }
        // IG = H(X) + H(Y) - H(X, Y), identical to H(X) - H(X | Y).
        const double ig = hx + hy - hxy;
        return std::clamp(2.0 * ig / (hx + hy), 0.0, 1.0);
    }

    int bins_;
    std::vector<std::vector<int>> codes_;
    std::vector<double> entropies_;
};

struct Selection {
    std::vector<int> kept;          // in descending class-SU order
    std::vector<double> class_su;   // SU(feature, class) for every feature
    int total_features = 0;
    int bins = 10;
    double delta = 0.0;

    double kept_fraction() const { return total_features == 0 ? 0.0 : static_cast<double>(kept.size()) / total_features; }
};

// Fast Correlation Based Filter. A feature is relevant when its class SU is
// positive and at least delta; ranking ties go to the lower feature index.
inline Selection fcbf_select(const Matrix& features, const Labels& labels, double delta, int bins = 10) {
    if (delta < 0.0) throw ConfigError("FCBF delta must be >= 0");
    if (static_cast<Eigen::Index>(labels.size()) != features.rows()) throw InputError("FCBF: feature and label counts differ");
    for (int y : labels) {
        if (y < 0) throw InputError("FCBF: negative class label");
    }
    const CodedColumns cols(features, bins);
    const auto target = label_codes(labels);
    const double h_target = entropy_codes(target);
    const int alphabet = labels.empty() ? 1 : *std::max_element(labels.begin(), labels.end()) + 1;

    Selection out;
    out.total_features = static_cast<int>(features.cols());
    out.bins = bins;
    out.delta = delta;
    out.class_su.resize(cols.size());
    for (std::size_t j = 0; j < cols.size(); ++j) out.class_su[j] = cols.su_against(j, target, h_target, alphabet);

    std::vector<int> ranked;
    for (std::size_t j = 0; j < cols.size(); ++j) {
        if (out.class_su[j] > 0.0 && out.class_su[j] >= delta) ranked.push_back(static_cast<int>(j));
    }
    std::stable_sort(ranked.begin(), ranked.end(), [&](int a, int b) {
        return out.class_su[static_cast<std::size_t>(a)] > out.class_su[static_cast<std::size_t>(b)];
    });
    std::vector<bool> removed(ranked.size(), false);
    for (std::size_t p = 0; p < ranked.size(); ++p) {
        if (removed[p]) continue;
        const auto i = static_cast<std::size_t>(ranked[p]);
        out.kept.push_back(ranked[p]);
        for (std::size_t q = p + 1; q < ranked.size(); ++q) {
            if (removed[q]) continue;
            const auto j = static_cast<std::size_t>(ranked[q]);
            if (cols.su(i, j) >= out.class_su[j]) removed[q] = true;
        }
    }
    return out;
}

// Full F x F matrix of pairwise SU.
inline Matrix su_matrix(const Matrix& features, int bins = 10) {
    const CodedColumns cols(features, bins);
    const auto f = static_cast<Eigen::Index>(cols.size());
    Matrix su = Matrix::Zero(f, f);
    for (Eigen::Index a = 0; a < f; ++a) {
        su(a, a) = cols.entropy(static_cast<std::size_t>(a)) > 0.0 ? 1.0 : 0.0;
        for (Eigen::Index b = a + 1; b < f; ++b) {
            su(a, b) = su(b, a) = cols.su(static_cast<std::size_t>(a), static_cast<std::size_t>(b));
        }
    }
    return su;
}

// CSV with a comment line recording the binning.
inline void write_su_csv(const std::string& path, const Matrix& su, int bins) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write " + path);
    out << "# equal-width bins=" << bins << '\n';
    out << std::setprecision(10);
    for (Eigen::Index r = 0; r < su.rows(); ++r) {
        for (Eigen::Index c = 0; c < su.cols(); ++c) {
            if (c > 0) out << ',';
            out << su(r, c);
        }
        out << '\n';
    }
    if (!out) throw InputError("write failed for " + path);
}

}  // namespace forgetbench::fcbf
