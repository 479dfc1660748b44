#pragma once

#include "forgetbench/core/error.hpp"
#include "forgetbench/core/types.hpp"

#include <cmath>
#include <string>

namespace forgetbench::geppnet {

struct LatticeCoord {
    int row = 0;
    int col = 0;
    bool operator==(const LatticeCoord&) const = default;
};

struct SomSchedule {
    double learning_rate = 0.1;
    double sigma0 = -1.0;       // negative: half the lattice diagonal
    double time_constant = 1.0; // tau, in iterations
};

// Kohonen map with exponentially decaying learning rate and radius. The
// iteration counter runs across sessions.
class SomLattice {
public:
    SomLattice() = default;
    SomLattice(int rows, int cols, int dim, SomSchedule schedule)
        : rows_(rows), cols_(cols), schedule_(schedule), weights_(Matrix::Zero(rows * cols, dim)) {
        if (rows < 1 || cols < 1 || dim < 1) throw ConfigError("SOM lattice sizes must be positive");
        if (schedule_.sigma0 < 0.0) schedule_.sigma0 = 0.5 * std::hypot(rows - 1.0, cols - 1.0);
        if (schedule_.time_constant <= 0.0) throw ConfigError("SOM time constant must be positive");
        build_grid();
    }

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    int units() const { return rows_ * cols_; }
    int dim() const { return static_cast<int>(weights_.cols()); }
    long iteration() const { return iteration_; }
    const SomSchedule& schedule() const { return schedule_; }
    const Matrix& weights() const { return weights_; }
    Matrix& weights() { return weights_; }

    double learning_rate_at(long t) const { return schedule_.learning_rate * std::exp(-static_cast<double>(t) / schedule_.time_constant); }
    double sigma_at(long t) const { return schedule_.sigma0 * std::exp(-static_cast<double>(t) / schedule_.time_constant); }

    LatticeCoord coord(int unit) const { return {unit / cols_, unit % cols_}; }

    RowVector squared_distances(const RowVector& x) const {
        check(x);
        return (weights_.rowwise() - x).rowwise().squaredNorm().transpose();
    }

    // [n x units] squared distances for a batch.
    Matrix squared_distances(const Matrix& x) const {
        if (x.cols() != dim()) throw ShapeError("SOM input has " + std::to_string(x.cols()) + " features, expected " + std::to_string(dim()));
        Matrix d = -2.0 * x * weights_.transpose();
        d.colwise() += x.rowwise().squaredNorm();
        d.rowwise() += weights_.rowwise().squaredNorm().transpose();
        return d.cwiseMax(0.0);
    }

    // Nearest unit; ties go to the lowest row-major index.
    int bmu_index(const RowVector& x) const {
        Eigen::Index best = 0;
        squared_distances(x).minCoeff(&best);
        return static_cast<int>(best);
    }

    LatticeCoord bmu(const RowVector& x) const { return coord(bmu_index(x)); }

    // Neighborhood weights around `winner` for radius sigma; sigma <= 0 keeps
    // only the winner.
    Vector neighborhood(int winner, double sigma) const {
        Vector h = Vector::Zero(units());
        if (sigma <= 0.0) {
            h(winner) = 1.0;
            return h;
        }
        const double r = grid_row_(winner);
        const double c = grid_col_(winner);
        const double denom = 2.0 * sigma * sigma;
        h = (-((grid_row_.array() - r).square() + (grid_col_.array() - c).square()) / denom).exp().matrix();
        return h;
    }

    // One Kohonen step with the current schedule values, then advances the clock.
    void update(const RowVector& x) {
        update_with(x, learning_rate_at(iteration_), sigma_at(iteration_));
        ++iteration_;
    }

    // One Kohonen step with explicit rate and radius; does not touch the clock.
    void update_with(const RowVector& x, double eta, double sigma) {
        const int winner = bmu_index(x);
        const Vector h = neighborhood(winner, sigma);
        for (int u = 0; u < units(); ++u) {
            const double step = eta * h(u);
            if (step == 0.0) continue;
            weights_.row(u) += step * (x - weights_.row(u));
        }
    }

    void tick() { ++iteration_; }

private:
    void check(const RowVector& x) const {
        if (x.size() != dim()) throw ShapeError("SOM input has " + std::to_string(x.size()) + " features, expected " + std::to_string(dim()));
    }

    void build_grid() {
        grid_row_.resize(units());
        grid_col_.resize(units());
        for (int u = 0; u < units(); ++u) {
            grid_row_(u) = u / cols_;
            grid_col_(u) = u % cols_;
        }
    }

    int rows_ = 0;
    int cols_ = 0;
    SomSchedule schedule_{};
    Matrix weights_;
    Vector grid_row_;
    Vector grid_col_;
    long iteration_ = 0;
};

}  // namespace forgetbench::geppnet
