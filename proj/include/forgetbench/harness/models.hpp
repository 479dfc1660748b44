#pragma once

#include "forgetbench/ewc/ewc.hpp"
#include "forgetbench/fel/fel.hpp"
#include "forgetbench/geppnet/geppnet.hpp"
#include "forgetbench/harness/config.hpp"
#include "forgetbench/learner/mlp.hpp"
#include "forgetbench/pathnet/pathnet.hpp"

#include <memory>
#include <set>
#include <string>

namespace forgetbench::harness {

// Reads typed values out of one hyper section and rejects leftover keys.
class Overrides {
public:
    Overrides(Json section, std::string name) : section_(std::move(section)), name_(std::move(name)) {}

    template <class T>
    void read(const char* key, T& target) {
        if (!section_.contains(key)) return;
        used_.insert(key);
        try {
            target = section_.at(key).get<T>();
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError("hyper." + name_ + "." + key + ": " + e.what());
        }
    }

    void read_optimizer(nn::OptimizerConfig& opt) {
        std::string kind;
        if (section_.contains("optimizer")) {
            read("optimizer", kind);
            opt.kind = nn::optimizer_kind_from_string(kind);
        }
        read("learning_rate", opt.learning_rate);
    }

    void read_train(nn::TrainConfig& tc) {
        read("batch_size", tc.batch_size);
        read("max_epochs", tc.max_epochs);
        read("patience", tc.patience);
        if (section_.contains("monitor")) {
            std::string m;
            read("monitor", m);
            tc.monitor = nn::stop_metric_from_string(m);
        }
    }

    void finish() const {
        for (const auto& [key, value] : section_.items()) {
            if (!used_.count(key)) throw ConfigError("unknown key hyper." + name_ + "." + key);
        }
    }

private:
    Json section_;
    std::string name_;
    std::set<std::string> used_;
};

inline MlpConfig mlp_config(const Json& section, const std::string& name = "mlp", MlpConfig c = {}) {
    Overrides o(section, name);
    o.read("hidden", c.hidden);
    o.read_optimizer(c.optimizer);
    o.read_train(c.train);
    o.read("validation_fraction", c.validation_fraction);
    o.finish();
    return c;
}

inline ewc::EwcConfig ewc_config(const Json& section) {
    ewc::EwcConfig c;
    Json rest = section;
    Overrides o(section, "ewc");
    o.read("lambda", c.lambda);
    o.read("fisher_samples", c.fisher_samples);
    o.read("merge_anchors", c.merge_anchors);
    for (const char* k : {"lambda", "fisher_samples", "merge_anchors"}) rest.erase(k);
    c.mlp = mlp_config(rest, "ewc", c.mlp);
    return c;
}

inline pathnet::PathNetConfig pathnet_config(const Json& section) {
    pathnet::PathNetConfig c;
    Overrides o(section, "pathnet");
    o.read("layers", c.topology.layers);
    o.read("modules", c.topology.modules);
    o.read("active", c.topology.active);
    o.read("units", c.topology.units);
    o.read("population", c.ga.population);
    o.read("generations", c.ga.generations);
    o.read("epochs_per_eval", c.ga.epochs_per_eval);
    o.read("mutation_rate", c.ga.mutation_rate);
    o.read("ga_patience", c.ga.patience);
    o.read_optimizer(c.optimizer);
    o.read("batch_size", c.batch_size);
    c.final_train.batch_size = c.batch_size;
    o.read("max_epochs", c.final_train.max_epochs);
    o.read("patience", c.final_train.patience);
    o.read("validation_fraction", c.validation_fraction);
    o.finish();
    c.topology.validate();
    return c;
}

inline geppnet::GeppNetConfig geppnet_config(const Json& section, geppnet::Variant variant) {
    geppnet::GeppNetConfig c;
    c.variant = variant;
    const std::string name = variant == geppnet::Variant::STM ? "geppnet_stm" : "geppnet";
    Overrides o(section, name);
    o.read("rows", c.rows);
    o.read("cols", c.cols);
    o.read("som_learning_rate", c.som_learning_rate);
    o.read("readout_learning_rate", c.readout_learning_rate);
    o.read("base_iterations", c.base_iterations);
    o.read("incremental_iterations", c.incremental_iterations);
    o.read("som_init_fraction", c.som_init_fraction);
    o.read("novelty_threshold", c.novelty_threshold);
    o.read("activation_sharpness", c.activation_sharpness);
    o.read("stm_capacity", c.stm_capacity);
    o.read("sleep_interval", c.sleep_interval);
    o.finish();
    c.validate();
    return c;
}

inline fel::FelLearnerConfig fel_config(const Json& section) {
    fel::FelLearnerConfig c;
    Overrides o(section, "fel");
    o.read("hidden", c.fel.hidden);
    o.read("fel_units", c.fel.fel_units);
    o.read("fan_in", c.fel.fan_in);
    o.read("excitatory_fraction", c.fel.excitatory_fraction);
    o.read("winners", c.fel.winners);
    o.read_optimizer(c.optimizer);
    o.read_train(c.train);
    o.read("validation_fraction", c.validation_fraction);
    o.finish();
    c.fel.validate();
    return c;
}

// Checks every hyper section without building a model.
inline void validate_hyper(const ExperimentConfig& cfg) {
    (void)mlp_config(cfg.hyper_for("mlp"));
    (void)mlp_config(cfg.hyper_for("ideal"), "ideal");
    (void)ewc_config(cfg.hyper_for("ewc"));
    (void)pathnet_config(cfg.hyper_for("pathnet"));
    (void)geppnet_config(cfg.hyper_for("geppnet"), geppnet::Variant::Plain);
    (void)geppnet_config(cfg.hyper_for("geppnet_stm"), geppnet::Variant::STM);
    (void)fel_config(cfg.hyper_for("fel"));
}

inline std::unique_ptr<Learner> make_learner(const std::string& model, LearnerShape shape, const Json& hyper,
                                             std::uint64_t seed) {
    const std::string id = canonical_model(model);
    if (id == "mlp") return std::make_unique<MlpLearner>(shape, mlp_config(hyper), seed);
    if (id == "ewc") return std::make_unique<ewc::EwcLearner>(shape, ewc_config(hyper), seed);
    if (id == "pathnet") return std::make_unique<pathnet::PathNetLearner>(shape, pathnet_config(hyper), seed);
    if (id == "geppnet") return std::make_unique<geppnet::GeppNetLearner>(shape, geppnet_config(hyper, geppnet::Variant::Plain), seed);
    if (id == "geppnet_stm") return std::make_unique<geppnet::GeppNetLearner>(shape, geppnet_config(hyper, geppnet::Variant::STM), seed);
    return std::make_unique<fel::FelLearner>(shape, fel_config(hyper), seed);
}

}  // namespace forgetbench::harness
