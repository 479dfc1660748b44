#pragma once

#include "forgetbench/data/loader.hpp"
#include "forgetbench/harness/config.hpp"
#include "forgetbench/harness/models.hpp"
#include "forgetbench/harness/record.hpp"
#include "forgetbench/learner/accuracy.hpp"
#include "forgetbench/learner/ideal.hpp"

#include <chrono>
#include <filesystem>
#include <functional>
#include <optional>
#include <set>
#include <string>

namespace forgetbench::harness {

inline data::SessionStream build_stream(const ExperimentConfig& cfg, const data::DatasetSplit& first,
                                        const data::DatasetSplit* second) {
    switch (cfg.protocol) {
        case data::Protocol::Permutation:
            return data::make_permutation_stream(first, cfg.sessions, derive_seed(cfg.seed, "stream"));
        case data::Protocol::IncrementalClass:
            return data::make_class_incremental_stream(first, cfg.base_fraction,
                                                       {cfg.shuffle_classes, derive_seed(cfg.seed, "stream")});
        case data::Protocol::MultiModal:
            if (second == nullptr) throw ConfigError("multimodal runs need a second dataset");
            return data::make_multimodal_stream(first, *second);
    }
    throw ConfigError("unknown protocol");
}

// Mean-per-class accuracy of `learner` on one session's test data, routed
// through that session's task id.
inline double session_accuracy(const Learner& learner, const data::StudySession& s) {
    return mean_per_class_accuracy(learner.predict_for_task(s.test_x, s.id), s.test_y, s.classes);
}

// Accuracy over everything seen up to and including session `upto`
// (1-based). Permutation sessions are averaged; class-disjoint sessions are
// pooled into one mean-per-class score over the union of their classes.
inline double seen_accuracy(const Learner& learner, const data::SessionStream& stream, int upto) {
    if (stream.protocol == data::Protocol::Permutation) {
        double sum = 0.0;
        for (int j = 0; j < upto; ++j) sum += session_accuracy(learner, stream.sessions[static_cast<std::size_t>(j)]);
        return sum / upto;
    }
    Labels preds;
    Labels truth;
    std::set<int> classes;
    for (int j = 0; j < upto; ++j) {
        const auto& s = stream.sessions[static_cast<std::size_t>(j)];
        const auto p = learner.predict_for_task(s.test_x, s.id);
        preds.insert(preds.end(), p.begin(), p.end());
        truth.insert(truth.end(), s.test_y.begin(), s.test_y.end());
        classes.insert(s.classes.begin(), s.classes.end());
    }
    return mean_per_class_accuracy(preds, truth, {classes.begin(), classes.end()});
}

// Offline training set for alpha_ideal: the untransformed training data of
// the whole stream (both modalities for multimodal runs).
inline std::pair<Matrix, Labels> offline_training_set(const data::SessionStream& stream) {
    if (stream.protocol == data::Protocol::Permutation) {
        const auto& s = stream.sessions.front();
        return {s.train_x, s.train_y};
    }
    Eigen::Index rows = 0;
    for (const auto& s : stream.sessions) rows += s.train_x.rows();
    Matrix x(rows, stream.input_dim);
    Labels y;
    Eigen::Index at = 0;
    for (const auto& s : stream.sessions) {
        x.middleRows(at, s.train_x.rows()) = s.train_x;
        at += s.train_x.rows();
        y.insert(y.end(), s.train_y.begin(), s.train_y.end());
    }
    return {std::move(x), std::move(y)};
}

inline double compute_alpha_ideal(const ExperimentConfig& cfg, const data::SessionStream& stream) {
    const auto [x, y] = offline_training_set(stream);
    const auto& base = stream.sessions.front();
    return train_offline_ideal(x, y, base.test_x, base.test_y, base.classes, stream.num_classes,
                               mlp_config(cfg.hyper_for("ideal"), "ideal"), cfg.seed);
}

// alpha_ideal values kept on disk, one file per (dataset, protocol, seed).
class IdealCache {
public:
    explicit IdealCache(std::filesystem::path dir) : dir_(std::move(dir)) {}

    std::filesystem::path path_for(const std::string& dataset, const std::string& protocol, std::uint64_t seed) const {
        return dir_ / (dataset + "_" + protocol + "_" + std::to_string(seed) + ".json");
    }

    static Json key(const ExperimentConfig& cfg, const data::SessionStream& stream) {
        return {{"dataset", stream.dataset},
                {"protocol", data::to_string(stream.protocol)},
                {"seed", cfg.seed},
                {"base_classes", stream.sessions.front().classes},
                {"ideal", cfg.hyper_for("ideal")}};
    }

    std::optional<double> lookup(const ExperimentConfig& cfg, const data::SessionStream& stream) const {
        const auto path = path_for(stream.dataset, data::to_string(stream.protocol), cfg.seed);
        if (!std::filesystem::exists(path)) return std::nullopt;
        const Json j = read_json_file(path);
        if (!j.contains("key") || j.at("key") != key(cfg, stream) || !j.contains("alpha_ideal")) return std::nullopt;
        return j.at("alpha_ideal").get<double>();
    }

    void store(const ExperimentConfig& cfg, const data::SessionStream& stream, double value) const {
        const Json j{{"key", key(cfg, stream)}, {"alpha_ideal", value}};
        write_text_atomic(path_for(stream.dataset, data::to_string(stream.protocol), cfg.seed), j.dump(2) + "\n");
    }

private:
    std::filesystem::path dir_;
};

struct RunOptions {
    const IdealCache* cache = nullptr;
    // Called after every session with (session id, learner).
    std::function<void(int, const Learner&)> on_session;
};

inline RunRecord run_on_data(const ExperimentConfig& raw, const data::DatasetSplit& first, const data::DatasetSplit* second,
                             const RunOptions& options = {}) {
    ExperimentConfig cfg = raw;
    cfg.model = canonical_model(cfg.model);
    cfg.validate();
    validate_hyper(cfg);
    const auto stream = build_stream(cfg, first, second);

    using Clock = std::chrono::steady_clock;
    RunRecord rec;
    rec.config = to_json(cfg);
    rec.model = cfg.model;
    rec.protocol = data::to_string(cfg.protocol);
    rec.dataset = stream.dataset;
    rec.seed = cfg.seed;
    rec.sessions = stream.size();

    const auto ideal_start = Clock::now();
    if (cfg.alpha_ideal) {
        rec.alpha_ideal = *cfg.alpha_ideal;
    } else if (auto hit = options.cache ? options.cache->lookup(cfg, stream) : std::nullopt) {
        rec.alpha_ideal = *hit;
    } else {
        rec.alpha_ideal = compute_alpha_ideal(cfg, stream);
        if (options.cache != nullptr) options.cache->store(cfg, stream, rec.alpha_ideal);
    }
    rec.timing.ideal_seconds = std::chrono::duration<double>(Clock::now() - ideal_start).count();
    if (!(rec.alpha_ideal > 0.0)) throw EvaluationError("alpha_ideal is 0; the offline model learned nothing");

    auto learner = make_learner(cfg.model, {stream.input_dim, stream.num_classes}, cfg.hyper_for(cfg.model),
                                derive_seed(cfg.seed, "learner"));
    for (const auto& s : stream.sessions) {
        const auto start = Clock::now();
        learner->train_session(s);
        rec.timing.session_seconds.push_back(std::chrono::duration<double>(Clock::now() - start).count());
        const auto mem = learner->memory();
        rec.aux_mb_per_session.push_back(to_megabytes(mem.aux_bytes));
        // Evaluation happens only here, between sessions.
        const double base = session_accuracy(*learner, stream.sessions.front());
        if (s.id == 1) {
            rec.base_accuracy = base;
        } else {
            rec.curve.push_back({s.id, base, session_accuracy(*learner, s), seen_accuracy(*learner, stream, s.id),
                                 to_megabytes(mem.model_bytes), to_megabytes(mem.aux_bytes)});
        }
        if (options.on_session) options.on_session(s.id, *learner);
    }
    const auto report = rec.recompute();
    rec.omega_base = report.omega_base;
    rec.omega_new = report.omega_new;
    rec.omega_all = report.omega_all;
    const auto mem = learner->memory();
    rec.model_mb = to_megabytes(mem.model_bytes);
    rec.aux_mb = to_megabytes(mem.aux_bytes);
    rec.timing.completed_at = utc_timestamp();
    return rec;
}

// Loads the configured data, runs, and writes the record under cfg.out_dir.
inline std::pair<RunRecord, std::filesystem::path> run(const ExperimentConfig& raw) {
    ExperimentConfig cfg = raw;
    cfg.model = canonical_model(cfg.model);
    cfg.validate();
    validate_hyper(cfg);
    if (cfg.dataset.empty()) throw ConfigError("--dataset is required");
    const auto first = data::load_dataset(cfg.dataset);
    std::optional<data::DatasetSplit> second;
    if (cfg.protocol == data::Protocol::MultiModal) second = data::load_dataset(cfg.dataset2);
    const IdealCache cache(std::filesystem::path(cfg.out_dir) / "ideal");
    RunOptions options;
    options.cache = &cache;
    auto rec = run_on_data(cfg, first, second ? &*second : nullptr, options);
    const auto path = save_record(rec, cfg.out_dir);
    return {std::move(rec), path};
}

// Computes (or reads from the cache) alpha_ideal for the configured data.
inline double ideal_for(const ExperimentConfig& raw, bool use_cache = true) {
    ExperimentConfig cfg = raw;
    if (cfg.dataset.empty()) throw ConfigError("--dataset is required");
    const auto first = data::load_dataset(cfg.dataset);
    std::optional<data::DatasetSplit> second;
    if (cfg.protocol == data::Protocol::MultiModal) {
        if (cfg.dataset2.empty()) throw ConfigError("multimodal runs need --dataset2");
        second = data::load_dataset(cfg.dataset2);
    }
    const auto stream = build_stream(cfg, first, second ? &*second : nullptr);
    const IdealCache cache(std::filesystem::path(cfg.out_dir) / "ideal");
    if (use_cache) {
        if (auto hit = cache.lookup(cfg, stream)) return *hit;
    }
    const double value = compute_alpha_ideal(cfg, stream);
    cache.store(cfg, stream, value);
    return value;
}

}  // namespace forgetbench::harness
