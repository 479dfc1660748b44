#pragma once

#include "forgetbench/core/error.hpp"
#include "forgetbench/core/rng.hpp"
#include "forgetbench/data/dataset.hpp"
#include "forgetbench/learner/accuracy.hpp"
#include "forgetbench/learner/learner.hpp"
#include "forgetbench/nn/dense.hpp"
#include "forgetbench/nn/loss.hpp"
#include "forgetbench/nn/optimizer.hpp"
#include "forgetbench/nn/trainer.hpp"

#include <algorithm>
#include <array>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

namespace forgetbench::pathnet {

struct Topology {
    int layers = 2;
    int modules = 10;         // M, modules per layer
    int active = 5;           // N, modules a path may use per layer
    int units = 80;           // width of every module

    void validate() const {
        if (layers < 1 || modules < 1 || units < 1) throw ConfigError("PathNet topology sizes must be positive");
        if (active < 1 || active > modules) throw ConfigError("PathNet needs 1 <= N <= M");
    }
};

// Per-layer sets of module indices.
struct Genotype {
    std::vector<std::vector<int>> layers;

    bool operator==(const Genotype&) const = default;

    bool valid(const Topology& topo) const {
        if (static_cast<int>(layers.size()) != topo.layers) return false;
        for (const auto& ids : layers) {
            if (ids.empty() || static_cast<int>(ids.size()) > topo.active) return false;
            if (!std::is_sorted(ids.begin(), ids.end()) || std::adjacent_find(ids.begin(), ids.end()) != ids.end()) return false;
            for (int m : ids) {
                if (m < 0 || m >= topo.modules) return false;
            }
        }
        return true;
    }

    static Genotype random(const Topology& topo, Rng& rng) {
        std::uniform_int_distribution<int> pick(0, topo.modules - 1);
        Genotype g;
        for (int l = 0; l < topo.layers; ++l) {
            std::set<int> ids;
            for (int k = 0; k < topo.active; ++k) ids.insert(pick(rng));
            g.layers.emplace_back(ids.begin(), ids.end());
        }
        return g;
    }
};

// Each selected index moves by u in {-2, -1, 1, 2} (mod M) with probability
// `rate`; indices that collide collapse into one.
inline Genotype mutate(const Genotype& parent, const Topology& topo, double rate, Rng& rng) {
    static constexpr std::array<int, 4> kShift{-2, -1, 1, 2};
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_int_distribution<int> shift(0, 3);
    Genotype child;
    for (const auto& ids : parent.layers) {
        std::set<int> next;
        for (int m : ids) {
            if (unit(rng) < rate) {
                m = ((m + kShift[static_cast<std::size_t>(shift(rng))]) % topo.modules + topo.modules) % topo.modules;
            }
            next.insert(m);
        }
        child.layers.emplace_back(next.begin(), next.end());
    }
    return child;
}

// Module weights, freeze flags and per-task heads.
struct State {
    Topology topology;
    int input_dim = 0;
    int num_classes = 0;
    std::vector<nn::DenseLayer> modules;  // layer l, module m at l * M + m
    std::vector<bool> frozen;
    std::vector<bool> trained;
    std::vector<nn::DenseLayer> heads;    // heads[t - 1] belongs to task t
    std::vector<Genotype> paths;          // winning path per finished task
    std::vector<std::vector<int>> task_classes;

    static State create(const Topology& topo, int input_dim, int num_classes, Rng& rng) {
        topo.validate();
        State s;
        s.topology = topo;
        s.input_dim = input_dim;
        s.num_classes = num_classes;
        for (int l = 0; l < topo.layers; ++l) {
            const int fan_in = l == 0 ? input_dim : topo.units;
            for (int m = 0; m < topo.modules; ++m) s.modules.push_back(nn::he_uniform(topo.units, fan_in, rng));
        }
        s.frozen.assign(s.modules.size(), false);
        s.trained.assign(s.modules.size(), false);
        return s;
    }

    std::size_t module_index(int layer, int module) const {
        return static_cast<std::size_t>(layer * topology.modules + module);
    }

    int frozen_count() const { return static_cast<int>(std::count(frozen.begin(), frozen.end(), true)); }
};

// Intermediate values of one forward pass along a path.
struct PathCache {
    std::vector<Matrix> layer_inputs;               // input of path layer l
    std::vector<std::vector<Matrix>> module_pre;    // pre-activation of each selected module
    Matrix head_input;
};

// Each path layer outputs the sum of its selected modules' ReLU outputs; the
// last sum feeds the head.
inline Matrix forward_on_path(const State& state, const Genotype& path, const nn::DenseLayer& head, const Matrix& x,
                              PathCache* cache = nullptr) {
    if (!path.valid(state.topology)) throw ConfigError("invalid PathNet genotype");
    if (x.cols() != state.input_dim) throw ShapeError("PathNet input has " + std::to_string(x.cols()) + " columns, expected " + std::to_string(state.input_dim));
    Matrix h = x;
    if (cache != nullptr) *cache = PathCache{};
    for (int l = 0; l < state.topology.layers; ++l) {
        Matrix sum = Matrix::Zero(x.rows(), state.topology.units);
        if (cache != nullptr) {
            cache->layer_inputs.push_back(h);
            cache->module_pre.emplace_back();
        }
        for (int m : path.layers[static_cast<std::size_t>(l)]) {
            Matrix z = nn::affine(state.modules[state.module_index(l, m)], h);
            sum += nn::relu(z);
            if (cache != nullptr) cache->module_pre.back().push_back(std::move(z));
        }
        h = std::move(sum);
    }
    if (cache != nullptr) cache->head_input = h;
    return nn::affine(head, h);
}

inline Matrix forward_on_path(const State& state, const Genotype& path, int task, const Matrix& x) {
    if (task < 1 || task > static_cast<int>(state.heads.size())) {
        throw StateError("PathNet has no head for task " + std::to_string(task));
    }
    return forward_on_path(state, path, state.heads[static_cast<std::size_t>(task - 1)], x);
}

struct PathGrads {
    std::vector<std::pair<std::size_t, nn::DenseLayer>> modules;  // (module index, gradient)
    nn::DenseLayer head;
};

inline PathGrads backward_on_path(const State& state, const Genotype& path, const nn::DenseLayer& head,
                                  const PathCache& cache, const Matrix& grad_logits) {
    PathGrads out;
    Matrix upstream;
    out.head = nn::affine_backward(head, cache.head_input, grad_logits, &upstream);
    for (int l = state.topology.layers - 1; l >= 0; --l) {
        const auto& ids = path.layers[static_cast<std::size_t>(l)];
        const auto& input = cache.layer_inputs[static_cast<std::size_t>(l)];
        Matrix grad_input = Matrix::Zero(input.rows(), input.cols());
        for (std::size_t k = 0; k < ids.size(); ++k) {
            const auto idx = state.module_index(l, ids[k]);
            const Matrix& z = cache.module_pre[static_cast<std::size_t>(l)][k];
            const Matrix g = (z.array() > 0.0).select(upstream, 0.0);
            Matrix gin;
            out.modules.emplace_back(idx, nn::affine_backward(state.modules[idx], input, g, l > 0 ? &gin : nullptr));
            if (l > 0) grad_input += gin;
        }
        upstream = std::move(grad_input);
    }
    return out;
}

inline Labels predict_for_task(const State& state, int task, const Matrix& x) {
    if (task < 1 || task > static_cast<int>(state.paths.size())) {
        throw StateError("PathNet has not learned task " + std::to_string(task));
    }
    const auto t = static_cast<std::size_t>(task - 1);
    const Matrix z = forward_on_path(state, state.paths[t], state.heads[t], x);
    std::vector<bool> allowed(static_cast<std::size_t>(state.num_classes), false);
    for (int c : state.task_classes[t]) allowed[static_cast<std::size_t>(c)] = true;
    return nn::argmax_rows(z, allowed);
}

// Freezes every module on `path` and records it as the route for `task`.
inline void freeze_winner(State& state, const Genotype& path, int task) {
    if (!path.valid(state.topology)) throw ConfigError("invalid PathNet genotype");
    for (int l = 0; l < state.topology.layers; ++l) {
        for (int m : path.layers[static_cast<std::size_t>(l)]) state.frozen[state.module_index(l, m)] = true;
    }
    if (static_cast<int>(state.paths.size()) < task) state.paths.resize(static_cast<std::size_t>(task));
    state.paths[static_cast<std::size_t>(task - 1)] = path;
}

struct GaConfig {
    int population = 20;
    int generations = 50;
    int epochs_per_eval = 1;
    double mutation_rate = -1.0;  // negative: 1 / (L * N)
    int patience = 10;            // generations without a better fitness before stopping
};

struct PathNetConfig {
    Topology topology{};
    GaConfig ga{};
    nn::OptimizerConfig optimizer{nn::OptimizerKind::Adam, 2e-3};
    int batch_size = 16;
    // Early-stopped training of the winning path after evolution.
    nn::TrainConfig final_train{16, 50, 10, nn::StopMetric::ValidationAccuracy, 0};
    double validation_fraction = 0.1;
};

// Trains the path's unfrozen modules and the head of the current task.
class PathTrainer {
public:
    PathTrainer(State& state, const PathNetConfig& config)
        : state_(&state), config_(&config), opt_(config.optimizer, block_shapes(state)) {}

    double step(State& state, const Genotype& path, const Matrix& xb, const Labels& yb) {
        auto& head = state.heads.back();
        PathCache cache;
        const Matrix z = forward_on_path(state, path, head, xb, &cache);
        const auto lg = nn::softmax_xent_grad(z, yb);
        const auto grads = backward_on_path(state, path, head, cache, lg.grad);
        opt_.begin_step();
        for (const auto& [idx, g] : grads.modules) {
            if (state.frozen[idx]) continue;
            opt_.update_block(idx, state.modules[idx], g);
            state.trained[idx] = true;
        }
        opt_.update_block(state.modules.size(), head, grads.head);
        return lg.loss;
    }

    void epochs(const Genotype& path, const Matrix& x, const Labels& y, int count, Rng& rng) {
        std::vector<std::size_t> order(static_cast<std::size_t>(x.rows()));
        std::iota(order.begin(), order.end(), std::size_t{0});
        const auto batch = static_cast<std::size_t>(config_->batch_size);
        for (int e = 0; e < count; ++e) {
            std::shuffle(order.begin(), order.end(), rng);
            for (std::size_t start = 0; start < order.size(); start += batch) {
                std::vector<std::size_t> rows(order.begin() + static_cast<std::ptrdiff_t>(start),
                                              order.begin() + static_cast<std::ptrdiff_t>(std::min(order.size(), start + batch)));
                step(*state_, path, take_rows(x, rows), take(y, rows));
            }
        }
    }

private:
    static nn::ParamList block_shapes(const State& state) {
        nn::ParamList shapes;
        for (const auto& m : state.modules) shapes.push_back(nn::DenseLayer::zeros_like(m));
        shapes.push_back(nn::DenseLayer::zeros_like(state.heads.back()));
        return shapes;
    }

    State* state_;
    const PathNetConfig* config_;
    nn::Optimizer opt_;
};

inline double path_accuracy(const State& state, const Genotype& path, const Matrix& x, const Labels& y,
                            const std::vector<bool>& allowed) {
    if (x.rows() == 0) return 0.0;
    return accuracy(nn::argmax_rows(forward_on_path(state, path, state.heads.back(), x), allowed), y);
}

struct EvolutionTrace {
    int generations_run = 0;
    std::vector<std::pair<int, int>> pairs;  // tournament pair per generation
    std::vector<double> best_fitness;        // best recorded fitness after each generation
};

// Binary-tournament search for the current task's path. Two members are
// trained in turn for `epochs_per_eval` epochs and scored on validation
// accuracy; the loser is replaced by a mutated copy of the winner. Returns
// the member with the highest recorded fitness (ties: lower index).
inline Genotype evolve_session(State& state, PathTrainer& trainer, const PathNetConfig& config, const Matrix& fit_x,
                               const Labels& fit_y, const Matrix& val_x, const Labels& val_y,
                               const std::vector<bool>& allowed, std::uint64_t seed, EvolutionTrace* trace = nullptr,
                               std::vector<Genotype> population = {}) {
    const auto& topo = state.topology;
    const auto& ga = config.ga;
    if (ga.population < 2) throw ConfigError("PathNet population must be >= 2");
    Rng rng = make_rng(seed, "ga");
    Rng train_rng = make_rng(seed, "ga-train");
    if (population.empty()) {
        for (int i = 0; i < ga.population; ++i) population.push_back(Genotype::random(topo, rng));
    }
    const int size = static_cast<int>(population.size());
    const double rate = ga.mutation_rate >= 0.0 ? ga.mutation_rate : 1.0 / (topo.layers * topo.active);
    std::vector<std::optional<double>> fitness(static_cast<std::size_t>(size));
    std::uniform_int_distribution<int> pick(0, size - 1);

    double best = -1.0;
    int stale = 0;
    for (int g = 0; g < ga.generations; ++g) {
        const int a = pick(rng);
        int b = pick(rng);
        while (b == a) b = pick(rng);
        for (int who : {a, b}) {
            const auto& path = population[static_cast<std::size_t>(who)];
            trainer.epochs(path, fit_x, fit_y, ga.epochs_per_eval, train_rng);
            fitness[static_cast<std::size_t>(who)] = path_accuracy(state, path, val_x, val_y, allowed);
        }
        const double fa = *fitness[static_cast<std::size_t>(a)];
        const double fb = *fitness[static_cast<std::size_t>(b)];
        const bool a_wins = fa > fb || (fa == fb && a < b);
        const int winner = a_wins ? a : b;
        const int loser = a_wins ? b : a;
        population[static_cast<std::size_t>(loser)] = mutate(population[static_cast<std::size_t>(winner)], topo, rate, rng);
        fitness[static_cast<std::size_t>(loser)] = fitness[static_cast<std::size_t>(winner)];

        const double round_best = std::max(fa, fb);
        if (round_best > best) {
            best = round_best;
            stale = 0;
        } else {
            ++stale;
        }
        if (trace != nullptr) {
            trace->pairs.emplace_back(a, b);
            trace->best_fitness.push_back(best);
            trace->generations_run = g + 1;
        }
        if (stale >= ga.patience || best >= 1.0) break;
    }

    int chosen = 0;
    double chosen_fit = -1.0;
    for (int i = 0; i < size; ++i) {
        const auto& f = fitness[static_cast<std::size_t>(i)];
        if (f && *f > chosen_fit) {
            chosen_fit = *f;
            chosen = i;
        }
    }
    return population[static_cast<std::size_t>(chosen)];
}

// PathNet as an incremental learner. Prediction needs the task id.
class PathNetLearner : public Learner {
public:
    PathNetLearner(LearnerShape shape, PathNetConfig config, std::uint64_t seed)
        : Learner(shape), config_(std::move(config)), seed_(seed) {
        Rng rng = make_rng(seed_, "init");
        state_ = State::create(config_.topology, shape.input_dim, shape.num_classes, rng);
    }

    std::string id() const override { return "pathnet"; }
    bool requires_task_id() const override { return true; }

    Labels predict_for_task(const Matrix& x, int task) const override {
        require_trained();
        return pathnet::predict_for_task(state_, task, x);
    }

    // Modules count as the model; each per-task head is auxiliary.
    MemoryLedger memory() const override {
        std::size_t modules = 0;
        for (const auto& m : state_.modules) modules += m.size();
        std::size_t heads = 0;
        for (const auto& h : state_.heads) heads += h.size();
        return {modules * sizeof(double), heads * sizeof(double)};
    }

    const State& state() const { return state_; }
    const EvolutionTrace& last_trace() const { return trace_; }

protected:
    void learn(const data::StudySession& session) override {
        const std::string tag = std::to_string(session.id);
        Rng head_rng = make_rng(seed_, "head-" + tag);
        state_.heads.push_back(nn::he_uniform(shape().num_classes, config_.topology.units, head_rng));
        state_.task_classes.push_back(session.classes);

        Rng split_rng = make_rng(seed_, "validation-" + tag);
        auto [fit_rows, val_rows] = data::stratified_holdout(session.train_y, config_.validation_fraction, split_rng);
        const Matrix fit_x = take_rows(session.train_x, fit_rows);
        const Labels fit_y = take(session.train_y, fit_rows);
        const Matrix val_x = take_rows(session.train_x, val_rows);
        const Labels val_y = take(session.train_y, val_rows);
        std::vector<bool> allowed(static_cast<std::size_t>(shape().num_classes), false);
        for (int c : session.classes) allowed[static_cast<std::size_t>(c)] = true;

        PathTrainer trainer(state_, config_);
        trace_ = {};
        const Genotype winner = evolve_session(state_, trainer, config_, fit_x, fit_y, val_x, val_y, allowed,
                                               derive_seed(seed_, "session-" + tag), &trace_);

        nn::TrainConfig tc = config_.final_train;
        tc.seed = derive_seed(seed_, "final-" + tag);
        auto step = [&](State& s, const Matrix& xb, const Labels& yb) { return trainer_step(trainer, s, winner, xb, yb); };
        auto score = [&](const State& s, const Matrix& vx, const Labels& vy) {
            const Matrix z = forward_on_path(s, winner, s.heads.back(), vx);
            return nn::ValidationScore{accuracy(nn::argmax_rows(z, allowed), vy), nn::softmax_xent_grad(z, vy).loss};
        };
        auto result = nn::train(state_, fit_x, fit_y, val_x, val_y, tc, step, score);
        state_ = std::move(result.model);
        freeze_winner(state_, winner, session.id);
    }

    Labels infer(const Matrix& x) const override {
        (void)x;
        throw StateError("pathnet routes through a per-task head; call predict_for_task with a task id");
    }

private:
    static double trainer_step(PathTrainer& trainer, State& s, const Genotype& path, const Matrix& xb, const Labels& yb) {
        return trainer.step(s, path, xb, yb);
    }

    PathNetConfig config_;
    std::uint64_t seed_;
    State state_;
    EvolutionTrace trace_;
};

}  // namespace forgetbench::pathnet
