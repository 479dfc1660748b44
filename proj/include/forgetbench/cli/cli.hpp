#pragma once

#include "forgetbench/data/loader.hpp"
#include "forgetbench/fcbf/fcbf.hpp"
#include "forgetbench/harness/plots.hpp"
#include "forgetbench/harness/run.hpp"
#include "forgetbench/harness/summary.hpp"

#include <CLI11.hpp>

#include <atomic>
#include <cmath>
#include <exception>
#include <iostream>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace forgetbench::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUser = 1;
inline constexpr int kExitInternal = 2;

// Thrown for a missing required flag; carries the subcommand's usage text.
struct UsageError : UserError {
    UsageError(const std::string& what, std::string usage) : UserError(what), usage(std::move(usage)) {}
    std::string usage;
};

struct RunFlags {
    std::string config;
    std::string protocol;
    std::vector<std::string> models;
    std::vector<std::string> datasets;
    std::string dataset2;
    int sessions = 0;
    std::uint64_t seed = 0;
    std::string out;
    int jobs = 1;
    double alpha_ideal = 0.0;
    double base_fraction = 0.5;
    bool shuffle_classes = false;
};

inline int exit_code_for(const std::exception_ptr& e) {
    try {
        std::rethrow_exception(e);
    } catch (const UserError&) {
        return kExitUser;
    } catch (...) {
        return kExitInternal;
    }
}

inline std::string describe(const std::exception_ptr& e) {
    try {
        std::rethrow_exception(e);
    } catch (const std::exception& ex) {
        return ex.what();
    } catch (...) {
        return "unknown error";
    }
}

// Subcommands share RunFlags but not every option.
inline bool given(const CLI::App& sub, const std::string& name) {
    const auto* opt = sub.get_option_no_throw(name);
    return opt != nullptr && opt->count() > 0;
}

// Flags beat the config file, which beats the defaults.
inline harness::ExperimentConfig base_config(const CLI::App& sub, const RunFlags& f) {
    harness::ExperimentConfig cfg;
    if (!f.config.empty()) cfg = harness::load_config_file(f.config);
    if (given(sub, "--protocol")) cfg.protocol = data::protocol_from_string(f.protocol);
    if (given(sub, "--dataset2")) cfg.dataset2 = f.dataset2;
    if (given(sub, "--sessions")) cfg.sessions = f.sessions;
    if (given(sub, "--seed")) cfg.seed = f.seed;
    if (given(sub, "--out")) cfg.out_dir = f.out;
    if (given(sub, "--alpha-ideal")) cfg.alpha_ideal = f.alpha_ideal;
    if (given(sub, "--base-fraction")) cfg.base_fraction = f.base_fraction;
    if (given(sub, "--shuffle-classes")) cfg.shuffle_classes = f.shuffle_classes;
    return cfg;
}

inline bool config_has(const std::string& path, const char* key) {
    return !path.empty() && harness::read_json_file(path).contains(key);
}

inline int do_run(const CLI::App& sub, const RunFlags& f, std::ostream& out, std::ostream& err) {
    const auto cfg = base_config(sub, f);
    const bool has_protocol = given(sub, "--protocol") || config_has(f.config, "protocol");
    std::vector<std::string> models = f.models;
    if (models.empty() && config_has(f.config, "model")) models.push_back(cfg.model);
    std::vector<std::string> datasets = f.datasets;
    if (datasets.empty() && !cfg.dataset.empty()) datasets.push_back(cfg.dataset);
    if (!has_protocol) throw UsageError("run: --protocol is required", sub.help());
    if (models.empty()) throw UsageError("run: --model is required", sub.help());
    if (datasets.empty()) throw UsageError("run: --dataset is required", sub.help());
    if (f.jobs < 1) throw ConfigError("--jobs must be >= 1");

    // Validate the whole matrix before any training starts.
    std::vector<harness::ExperimentConfig> jobs;
    for (const auto& m : models) {
        for (const auto& d : datasets) {
            auto c = cfg;
            c.model = harness::canonical_model(m);
            c.dataset = d;
            c.validate();
            harness::validate_hyper(c);
            jobs.push_back(std::move(c));
        }
    }

    std::mutex io;
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> failures(jobs.size());
    auto worker = [&]() {
        for (std::size_t i = next++; i < jobs.size(); i = next++) {
            try {
                auto [rec, path] = harness::run(jobs[i]);
                std::lock_guard lock(io);
                out << path.string() << "  omega_base=" << harness::format_double(rec.omega_base)
                    << " omega_new=" << harness::format_double(rec.omega_new)
                    << " omega_all=" << harness::format_double(rec.omega_all) << '\n';
            } catch (...) {
                failures[i] = std::current_exception();
                std::lock_guard lock(io);
                err << "error: " << jobs[i].model << " on " << jobs[i].dataset << ": " << describe(failures[i]) << '\n';
            }
        }
    };
    const int threads = std::min<int>(f.jobs, static_cast<int>(jobs.size()));
    std::vector<std::thread> pool;
    for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    int code = kExitOk;
    for (const auto& e : failures) {
        if (e) code = std::max(code, exit_code_for(e));
    }
    return code;
}

inline int do_ideal(const CLI::App& sub, const RunFlags& f, bool refresh, std::ostream& out) {
    auto cfg = base_config(sub, f);
    if (!f.datasets.empty()) cfg.dataset = f.datasets.front();
    if (cfg.dataset.empty()) throw UsageError("ideal: --dataset is required", sub.help());
    const double v = harness::ideal_for(cfg, !refresh);
    out << "alpha_ideal " << harness::format_double(v) << '\n';
    return kExitOk;
}

inline int do_metrics(const std::string& record_path, std::ostream& out) {
    const auto rec = harness::load_record(record_path);
    const auto report = rec.recompute();
    out << "T " << report.sessions << '\n'
        << "alpha_ideal " << harness::format_double(report.alpha_ideal) << '\n'
        << "omega_base " << harness::format_double(report.omega_base) << '\n'
        << "omega_new " << harness::format_double(report.omega_new) << '\n'
        << "omega_all " << harness::format_double(report.omega_all) << '\n';
    const double drift = std::max({std::abs(report.omega_base - rec.omega_base), std::abs(report.omega_new - rec.omega_new),
                                   std::abs(report.omega_all - rec.omega_all)});
    if (drift > 1e-12) throw FormatError(record_path + ": stored omega values differ from the recomputed ones by " + std::to_string(drift));
    return kExitOk;
}

inline int do_fcbf(const std::string& dataset, int bins, double delta, const std::string& out_dir, bool su_matrix,
                   std::ostream& out) {
    const auto ds = data::load_dataset(dataset);
    const auto sel = fcbf::fcbf_select(ds.train.features, ds.train.labels, delta, bins);
    harness::Json j{{"dataset", ds.name()},
                    {"bins", bins},
                    {"delta", delta},
                    {"features", sel.total_features},
                    {"kept", sel.kept.size()},
                    {"kept_percent", 100.0 * sel.kept_fraction()},
                    {"kept_features", sel.kept}};
    const std::filesystem::path dir(out_dir);
    harness::write_text_atomic(dir / ("fcbf_" + ds.name() + ".json"), j.dump(2) + "\n");
    if (su_matrix) {
        std::filesystem::create_directories(dir);
        fcbf::write_su_csv((dir / ("su_" + ds.name() + ".csv")).string(), fcbf::su_matrix(ds.train.features, bins), bins);
    }
    char pct[32];
    std::snprintf(pct, sizeof pct, "%.1f", 100.0 * sel.kept_fraction());
    out << ds.name() << ": kept " << sel.kept.size() << " of " << sel.total_features << " features (" << pct << "%)\n";
    return kExitOk;
}

inline std::vector<harness::RunRecord> load_all(const std::string& dir) {
    std::vector<harness::RunRecord> records;
    for (const auto& p : harness::list_records(dir)) records.push_back(harness::load_record(p));
    if (records.empty()) throw InputError("no run records in " + dir);
    return records;
}

inline int do_summarize(const std::string& dir, std::ostream& out) {
    const auto s = harness::summarize(load_all(dir));
    const std::filesystem::path d(dir);
    harness::write_text_atomic(d / "summary.csv", harness::summary_csv(s));
    harness::write_text_atomic(d / "records.csv", harness::records_csv(s));
    out << harness::summary_csv(s);
    return kExitOk;
}

inline int do_plot(const std::string& dir, const std::string& figure, const std::string& protocol, const std::string& out_dir,
                   std::ostream& out) {
    auto records = load_all(dir);
    if (!protocol.empty()) {
        const auto want = data::to_string(data::protocol_from_string(protocol));
        std::erase_if(records, [&](const harness::RunRecord& r) { return r.protocol != want; });
        if (records.empty()) throw InputError("no " + want + " records in " + dir);
    }
    const auto [csv, svg] = harness::emit_plots(records, harness::figure_from_string(figure), out_dir.empty() ? dir : out_dir);
    out << csv.string() << '\n' << svg.string() << '\n';
    return kExitOk;
}

inline int parse_and_dispatch(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    CLI::App app{"forgetbench: incremental-learning benchmark runner"};
    app.require_subcommand(1);
    app.set_version_flag("--version", harness::kToolVersion);

    RunFlags rf;
    auto* run = app.add_subcommand("run", "Train a model over a session stream and write a run record");
    run->add_option("--config", rf.config, "JSON config file")->check(CLI::ExistingFile);
    run->add_option("--protocol", rf.protocol, "permutation | incremental-class | multimodal");
    run->add_option("--model", rf.models, "mlp | ewc | pathnet | geppnet | geppnet_stm | fel (repeatable)");
    run->add_option("--dataset", rf.datasets, "Dataset directory (repeatable; FORGETBENCH_DATA is the fallback root)");
    run->add_option("--dataset2", rf.dataset2, "Second modality (multimodal)");
    run->add_option("--sessions", rf.sessions, "Sessions T (permutation)");
    run->add_option("--seed", rf.seed, "Master seed");
    run->add_option("--out", rf.out, "Output directory (default ./results)");
    run->add_option("--jobs", rf.jobs, "Parallel runs over the model x dataset matrix");
    run->add_option("--alpha-ideal", rf.alpha_ideal, "Pin alpha_ideal instead of training the offline MLP");
    run->add_option("--base-fraction", rf.base_fraction, "Share of classes in the base session (incremental-class)");
    run->add_flag("--shuffle-classes", rf.shuffle_classes, "Seeded class order instead of ascending labels");

    RunFlags idf;
    bool refresh = false;
    auto* ideal = app.add_subcommand("ideal", "Train the offline MLP and cache alpha_ideal");
    ideal->add_option("--config", idf.config, "JSON config file")->check(CLI::ExistingFile);
    ideal->add_option("--dataset", idf.datasets, "Dataset directory")->expected(1);
    ideal->add_option("--dataset2", idf.dataset2, "Second modality (multimodal)");
    ideal->add_option("--protocol", idf.protocol, "Protocol whose base set is scored (default permutation)");
    ideal->add_option("--seed", idf.seed, "Master seed");
    ideal->add_option("--out", idf.out, "Output directory holding the cache (default ./results)");
    ideal->add_option("--base-fraction", idf.base_fraction, "Share of classes in the base session");
    ideal->add_flag("--shuffle-classes", idf.shuffle_classes, "Seeded class order");
    ideal->add_flag("--refresh", refresh, "Ignore a cached value");

    std::string record_path;
    auto* metrics = app.add_subcommand("metrics", "Recompute Omega values from a run record");
    metrics->add_option("--record", record_path, "Run record JSON")->required()->check(CLI::ExistingFile);

    std::string fcbf_dataset;
    int bins = 10;
    double delta = 0.0;
    std::string fcbf_out = "results";
    bool su = false;
    auto* fcbf = app.add_subcommand("fcbf", "Fast Correlation Based Filter on a dataset's training split");
    fcbf->add_option("--dataset", fcbf_dataset, "Dataset directory")->required();
    fcbf->add_option("--bins", bins, "Equal-width bins per feature")->check(CLI::PositiveNumber);
    fcbf->add_option("--delta", delta, "Relevance threshold")->check(CLI::NonNegativeNumber);
    fcbf->add_option("--out", fcbf_out, "Output directory (default ./results)");
    fcbf->add_flag("--su-matrix", su, "Also write the full symmetric-uncertainty matrix as CSV");

    std::string sum_dir;
    auto* summarize = app.add_subcommand("summarize", "Mean Omega_all per model and protocol");
    summarize->add_option("--dir", sum_dir, "Directory of run records")->required();

    std::string plot_dir;
    std::string figure;
    std::string plot_protocol;
    std::string plot_out;
    auto* plot = app.add_subcommand("plot", "Curve CSV and SVG for one figure family");
    plot->add_option("--dir", plot_dir, "Directory of run records")->required();
    plot->add_option("--figure", figure, "base | new | all")->required()->check(CLI::IsMember({"base", "new", "all"}));
    plot->add_option("--protocol", plot_protocol, "Only plot records of this protocol");
    plot->add_option("--out", plot_out, "Output directory (default: --dir)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUser;
    }

    try {
        if (run->parsed()) return do_run(*run, rf, out, err);
        if (ideal->parsed()) return do_ideal(*ideal, idf, refresh, out);
        if (metrics->parsed()) return do_metrics(record_path, out);
        if (fcbf->parsed()) return do_fcbf(fcbf_dataset, bins, delta, fcbf_out, su, out);
        if (summarize->parsed()) return do_summarize(sum_dir, out);
        if (plot->parsed()) return do_plot(plot_dir, figure, plot_protocol, plot_out, out);
    } catch (const UsageError& e) {
        err << "error: " << e.what() << "\n\n" << e.usage;
        return kExitUser;
    } catch (...) {
        const auto e = std::current_exception();
        err << "error: " << describe(e) << '\n';
        return exit_code_for(e);
    }
    return kExitInternal;
}

}  // namespace forgetbench::cli
