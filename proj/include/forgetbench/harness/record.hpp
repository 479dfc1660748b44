#pragma once

#include "forgetbench/harness/config.hpp"
#include "forgetbench/learner/learner.hpp"
#include "forgetbench/metrics/omega.hpp"

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <string>
#include <thread>
#include <vector>

namespace forgetbench::harness {

inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kToolVersion = "0.1.0";

struct SessionRecord {
    int session = 0;
    double alpha_base = 0.0;
    double alpha_new = 0.0;
    double alpha_all = 0.0;
    double model_mb = 0.0;
    double aux_mb = 0.0;
};

// Wall-clock data kept apart so two runs with equal seeds compare equal
// once this block is dropped.
struct Timing {
    std::vector<double> session_seconds;  // index 0 is session 1
    double ideal_seconds = 0.0;
    std::string completed_at;
};

struct RunRecord {
    Json config = Json::object();
    std::string model;
    std::string protocol;
    std::string dataset;
    std::uint64_t seed = 0;
    int sessions = 0;
    double base_accuracy = 0.0;  // session-1 test accuracy right after session 1
    double alpha_ideal = 0.0;
    std::vector<SessionRecord> curve;  // sessions 2..T
    double omega_base = 0.0;
    double omega_new = 0.0;
    double omega_all = 0.0;
    double model_mb = 0.0;
    double aux_mb = 0.0;
    std::vector<double> aux_mb_per_session;  // after each session, 1..T
    std::string tool_version = kToolVersion;
    Timing timing;

    std::vector<metrics::AlphaTriple> alphas() const {
        std::vector<metrics::AlphaTriple> out;
        for (const auto& s : curve) out.push_back({s.alpha_base, s.alpha_new, s.alpha_all});
        return out;
    }

    metrics::MetricsReport recompute() const { return metrics::make_report(alphas(), alpha_ideal); }
};

inline double to_megabytes(std::size_t bytes) { return static_cast<double>(bytes) / kBytesPerMegabyte; }

inline std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

inline Json to_json(const RunRecord& r) {
    Json j;
    j["schema_version"] = kSchemaVersion;
    j["tool_version"] = r.tool_version;
    j["model"] = r.model;
    j["protocol"] = r.protocol;
    j["dataset"] = r.dataset;
    j["seed"] = r.seed;
    j["sessions"] = r.sessions;
    j["config"] = r.config;
    j["alpha_ideal"] = r.alpha_ideal;
    j["base_accuracy"] = r.base_accuracy;
    Json curve = Json::array();
    for (const auto& s : r.curve) {
        curve.push_back({{"session", s.session},
                         {"alpha_base", s.alpha_base},
                         {"alpha_new", s.alpha_new},
                         {"alpha_all", s.alpha_all},
                         {"model_mb", s.model_mb},
                         {"aux_mb", s.aux_mb}});
    }
    j["curve"] = std::move(curve);
    j["omega"] = {{"base", r.omega_base}, {"new", r.omega_new}, {"all", r.omega_all}};
    j["model_mb"] = r.model_mb;
    j["aux_mb"] = r.aux_mb;
    j["aux_mb_per_session"] = r.aux_mb_per_session;
    j["timing"] = {{"session_seconds", r.timing.session_seconds},
                   {"ideal_seconds", r.timing.ideal_seconds},
                   {"completed_at", r.timing.completed_at}};
    return j;
}

inline RunRecord record_from_json(const Json& j) {
    try {
        const int version = j.at("schema_version").get<int>();
        if (version != kSchemaVersion) {
            throw FormatError("unsupported schema_version " + std::to_string(version) + " (expected " + std::to_string(kSchemaVersion) + ")");
        }
        RunRecord r;
        r.tool_version = j.at("tool_version").get<std::string>();
        r.model = j.at("model").get<std::string>();
        r.protocol = j.at("protocol").get<std::string>();
        r.dataset = j.at("dataset").get<std::string>();
        r.seed = j.at("seed").get<std::uint64_t>();
        r.sessions = j.at("sessions").get<int>();
        r.config = j.at("config");
        r.alpha_ideal = j.at("alpha_ideal").get<double>();
        r.base_accuracy = j.at("base_accuracy").get<double>();
        for (const auto& s : j.at("curve")) {
            r.curve.push_back({s.at("session").get<int>(), s.at("alpha_base").get<double>(), s.at("alpha_new").get<double>(),
                               s.at("alpha_all").get<double>(), s.at("model_mb").get<double>(), s.at("aux_mb").get<double>()});
        }
        const auto& om = j.at("omega");
        r.omega_base = om.at("base").get<double>();
        r.omega_new = om.at("new").get<double>();
        r.omega_all = om.at("all").get<double>();
        r.model_mb = j.at("model_mb").get<double>();
        r.aux_mb = j.at("aux_mb").get<double>();
        r.aux_mb_per_session = j.at("aux_mb_per_session").get<std::vector<double>>();
        const auto& t = j.at("timing");
        r.timing.session_seconds = t.at("session_seconds").get<std::vector<double>>();
        r.timing.ideal_seconds = t.at("ideal_seconds").get<double>();
        r.timing.completed_at = t.at("completed_at").get<std::string>();
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("malformed run record: ") + e.what());
    }
}

inline std::string record_file_name(const RunRecord& r) {
    return r.model + "_" + r.protocol + "_" + r.dataset + "_" + std::to_string(r.seed) + ".json";
}

// Writes through a temporary file and a rename so readers never see a
// partial record.
inline void write_text_atomic(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    const auto tmp = std::filesystem::path(path.string() + ".tmp" + std::to_string(std::hash<std::thread::id>{}(std::this_thread::get_id())));
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw InputError("cannot write " + tmp.string());
        out << text;
        if (!out) throw InputError("write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

inline std::filesystem::path save_record(const RunRecord& r, const std::filesystem::path& dir) {
    const auto path = dir / record_file_name(r);
    write_text_atomic(path, to_json(r).dump(2) + "\n");
    return path;
}

inline RunRecord load_record(const std::filesystem::path& path) { return record_from_json(read_json_file(path)); }

inline std::vector<std::filesystem::path> list_records(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir)) throw InputError("not a directory: " + dir.string());
    std::vector<std::filesystem::path> out;
    for (const auto& e : std::filesystem::directory_iterator(dir)) {
        if (e.is_regular_file() && e.path().extension() == ".json") {
            const Json j = read_json_file(e.path());
            if (j.is_object() && j.contains("schema_version") && j.contains("curve")) out.push_back(e.path());
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace forgetbench::harness
