#pragma once

#include "forgetbench/core/error.hpp"
#include "forgetbench/data/streams.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace forgetbench::harness {

using Json = nlohmann::ordered_json;

inline const std::vector<std::string>& known_models() {
    static const std::vector<std::string> models{"mlp", "ewc", "pathnet", "geppnet", "geppnet_stm", "fel"};
    return models;
}

inline std::string canonical_model(const std::string& name) {
    if (name == "geppnet+stm" || name == "geppnet-stm") return "geppnet_stm";
    for (const auto& m : known_models()) {
        if (m == name) return m;
    }
    throw ConfigError("unknown model '" + name + "' (expected mlp, ewc, pathnet, geppnet, geppnet_stm or fel)");
}

struct ExperimentConfig {
    data::Protocol protocol = data::Protocol::Permutation;
    std::string model = "mlp";
    std::string dataset;
    std::string dataset2;      // multimodal only
    int sessions = 10;         // permutation only
    std::uint64_t seed = 0;
    double base_fraction = 0.5;
    bool shuffle_classes = false;
    std::optional<double> alpha_ideal;  // pinned value skips the offline run
    Json hyper = Json::object();        // per-model overrides: {"ewc": {...}, "ideal": {...}}
    std::string out_dir = "results";

    void validate() const {
        (void)canonical_model(model);
        if (model == "pathnet" && protocol == data::Protocol::IncrementalClass) {
            throw ConfigError("pathnet is not run on the incremental-class protocol: it needs the task id at test time, "
                              "which that protocol does not provide");
        }
        if (protocol == data::Protocol::Permutation && sessions < 2) throw ConfigError("--sessions must be >= 2");
        if (protocol == data::Protocol::MultiModal && dataset2.empty()) throw ConfigError("multimodal runs need --dataset2");
        if (protocol != data::Protocol::MultiModal && !dataset2.empty()) throw ConfigError("--dataset2 is only used by the multimodal protocol");
        if (!(base_fraction > 0.0 && base_fraction < 1.0)) throw ConfigError("base_fraction must lie in (0, 1)");
        if (alpha_ideal && !(*alpha_ideal > 0.0)) throw ConfigError("alpha_ideal must be > 0");
        if (!hyper.is_object()) throw ConfigError("'hyper' must be a JSON object");
        static const std::set<std::string> sections{"mlp", "ewc", "pathnet", "geppnet", "geppnet_stm", "fel", "ideal"};
        for (const auto& [key, value] : hyper.items()) {
            if (!sections.count(key)) throw ConfigError("unknown hyper section '" + key + "'");
            if (!value.is_object()) throw ConfigError("hyper section '" + key + "' must be an object");
        }
    }

    Json hyper_for(const std::string& section) const {
        return hyper.contains(section) ? hyper.at(section) : Json::object();
    }
};

inline Json to_json(const ExperimentConfig& c) {
    Json j;
    j["protocol"] = data::to_string(c.protocol);
    j["model"] = c.model;
    j["dataset"] = c.dataset;
    if (!c.dataset2.empty()) j["dataset2"] = c.dataset2;
    if (c.protocol == data::Protocol::Permutation) j["sessions"] = c.sessions;
    j["seed"] = c.seed;
    if (c.protocol == data::Protocol::IncrementalClass) {
        j["base_fraction"] = c.base_fraction;
        j["shuffle_classes"] = c.shuffle_classes;
    }
    if (c.alpha_ideal) j["alpha_ideal"] = *c.alpha_ideal;
    j["hyper"] = c.hyper;
    return j;
}

// Applies the keys present in `j` on top of `c`. Unknown keys are rejected.
inline void apply_json(ExperimentConfig& c, const Json& j) {
    if (!j.is_object()) throw ConfigError("experiment config must be a JSON object");
    try {
        for (const auto& [key, value] : j.items()) {
            if (key == "protocol") c.protocol = data::protocol_from_string(value.get<std::string>());
            else if (key == "model") c.model = canonical_model(value.get<std::string>());
            else if (key == "dataset") c.dataset = value.get<std::string>();
            else if (key == "dataset2") c.dataset2 = value.get<std::string>();
            else if (key == "sessions") c.sessions = value.get<int>();
            else if (key == "seed") c.seed = value.get<std::uint64_t>();
            else if (key == "base_fraction") c.base_fraction = value.get<double>();
            else if (key == "shuffle_classes") c.shuffle_classes = value.get<bool>();
            else if (key == "alpha_ideal") c.alpha_ideal = value.get<double>();
            else if (key == "hyper") c.hyper = value;
            else if (key == "out") c.out_dir = value.get<std::string>();
            else throw ConfigError("unknown config key '" + key + "'");
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("bad config value: ") + e.what());
    }
}

inline Json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open " + path.string());
    try {
        return Json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

inline ExperimentConfig load_config_file(const std::filesystem::path& path) {
    ExperimentConfig c;
    apply_json(c, read_json_file(path));
    return c;
}

}  // namespace forgetbench::harness
