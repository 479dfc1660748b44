// Incremental-class learning on synthetic Gaussian blobs: trains each model
// on a 5-class base session followed by one session per new class and prints
// the three omega scores.
#include "forgetbench/forgetbench.hpp"

#include <cstdio>

using namespace forgetbench;

int main() {
    const auto blobs = data::synth_blobs(10, 1000, 16, 1.0, 3);
    const auto split = data::train_test_split(blobs, 0.25, 3);

    harness::ExperimentConfig cfg;
    cfg.protocol = data::Protocol::IncrementalClass;
    cfg.seed = 1;
    cfg.hyper = {{"mlp", {{"hidden", {64}}}},
                 {"ewc", {{"hidden", {64}}, {"lambda", 1000.0}, {"learning_rate", 1e-3}}},
                 {"fel", {{"hidden", 64}, {"fel_units", 300}, {"learning_rate", 1e-3}}},
                 {"geppnet", {{"rows", 8}, {"cols", 8}, {"base_iterations", 4000}, {"incremental_iterations", 1000},
                              {"readout_learning_rate", 0.5}}},
                 {"ideal", {{"hidden", {64}}}}};
    cfg.alpha_ideal = harness::compute_alpha_ideal(cfg, harness::build_stream(cfg, split, nullptr));
    std::printf("alpha_ideal %.3f\n%-8s %10s %10s %10s\n", *cfg.alpha_ideal, "model", "omega_base", "omega_new", "omega_all");

    for (const char* model : {"mlp", "ewc", "fel", "geppnet"}) {
        cfg.model = model;
        const auto rec = harness::run_on_data(cfg, split, nullptr);
        std::printf("%-8s %10.3f %10.3f %10.3f\n", model, rec.omega_base, rec.omega_new, rec.omega_all);
    }
}
