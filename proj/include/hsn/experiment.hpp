#pragma once

#include <chrono>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include "hsn/config.hpp"
#include "hsn/dataset.hpp"
#include "hsn/layers.hpp"
#include "hsn/model.hpp"
#include "hsn/train.hpp"

namespace hsn {

struct ExperimentResult {
    std::string model;
    FitResult fit;
    double train_accuracy = 0.0;
    double val_accuracy = 0.0;
    double test_accuracy = 0.0;
    double seconds = 0.0;
    DatasetSummary data;
    AttentionState attention;  ///< filled for attention models
    AttentionRatios ratios;
};

inline Dataset resolve_dataset(const ExperimentConfig& cfg) {
    return cfg.dataset == "sbm" ? generate_sbm(cfg.sbm) : load_dataset(cfg.dataset);
}

/// Trains and evaluates one model on an in-memory dataset. Nothing is written.
inline ExperimentResult train_and_evaluate(const Dataset& ds, const ModelConfig& mc, const TrainConfig& tc) {
    const auto start = std::chrono::steady_clock::now();
    std::mt19937_64 rng(tc.seed);
    auto model = make_model(mc, ds.features.cols(), ds.num_classes(), rng);
    ExperimentResult r;
    r.model = model->name();
    r.data = summarize(ds);
    r.fit = fit(*model, ds.graph, ds.features, ds.labels, ds.splits, tc);
    const Matrix logits = model->predict(ds.graph, ds.features, &r.attention);
    r.train_accuracy = accuracy(logits, ds.labels, ds.splits.train);
    if (!ds.splits.val.empty()) r.val_accuracy = accuracy(logits, ds.labels, ds.splits.val);
    r.test_accuracy = accuracy(logits, ds.labels, ds.splits.test);
    if (!r.attention.heads.empty()) r.ratios = attention_ratio(r.attention);
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return r;
}

/// Writes metrics.csv, summary.txt and (attention models) attention_ratios.csv.
inline void write_experiment_outputs(const ExperimentResult& r, const std::string& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    const fs::path p(dir);
    {
        std::ofstream out(p / "metrics.csv");
        if (!out) throw MissingFile("cannot write metrics.csv in '" + dir + "'");
        write_metrics_csv(out, r.fit);
    }
    {
        std::ofstream out(p / "summary.txt");
        out << "model: " << r.model << '\n'
            << "dataset: " << to_string(r.data) << '\n'
            << "epochs: " << r.fit.history.size() << '\n'
            << "best_epoch: " << r.fit.best_epoch << '\n'
            << "train_accuracy: " << r.train_accuracy << '\n'
            << "val_accuracy: " << r.val_accuracy << '\n'
            << "test_accuracy: " << r.test_accuracy << '\n'
            << "runtime_seconds: " << r.seconds << '\n';
        if (!r.ratios.skipped.empty()) out << "attention_ratio_skipped_nodes: " << r.ratios.skipped.size() << '\n';
    }
    if (!r.attention.heads.empty()) {
        std::ofstream out(p / "attention_ratios.csv");
        write_attention_ratios_csv(out, r.ratios);
    }
}

inline ExperimentResult run_experiment(const ExperimentConfig& cfg) {
    const Dataset ds = resolve_dataset(cfg);
    ExperimentResult r = train_and_evaluate(ds, cfg.model, cfg.train);
    write_experiment_outputs(r, cfg.output);
    return r;
}

inline ExperimentResult run_experiment(const std::string& config_path) { return run_experiment(load_config(config_path)); }

}  // namespace hsn
