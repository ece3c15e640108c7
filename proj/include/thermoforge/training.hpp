#pragma once

#include <cstdint>
#include <vector>

#include "thermoforge/fno.hpp"
#include "thermoforge/metrics.hpp"
#include "thermoforge/windowing.hpp"

namespace thermoforge {

struct TrainOptions {
    int epochs = 50;
    int batch_size = 64;
    double lr = 1e-3;
    double weight_decay = 1e-4;
    double split_fraction = 0.9; // train share of the seeded shuffle
    std::uint64_t split_seed = 1;
    std::uint64_t init_seed = 1;
    bool verbose = true;
};

struct MetricSet {
    double mse = 0.0;
    double nrmse = 0.0;
    double nl2 = 0.0;
    double r2 = 0.0;
};

struct EpochMetrics {
    MetricSet train; // aggregated from the epoch's training passes
    MetricSet test;  // dedicated evaluation at epoch end
};

struct TrainResult {
    FnoModel model;
    std::vector<EpochMetrics> history;
    std::vector<std::size_t> train_indices;
    std::vector<std::size_t> test_indices;
};

// Normalized model input channels for one sample, [point][in_channels].
void assemble_input(const WindowSample& sample, int edge, const DatasetNorm& norm,
                    double* out);

// Masked NL2 (sum form) on de-normalized Celsius, averaged over the batch.
// Gradients flow through the de-normalization.
TrainResult train_fno(const FnoConfig& cfg, const WindowDataset& dataset,
                      const TrainOptions& opts);

// Forward + de-normalized masked scores for the given samples.
std::vector<WindowScore> evaluate_model(const FnoModel& model, const WindowDataset& dataset,
                                        const std::vector<std::size_t>& indices);
std::vector<WindowScore> evaluate_model(const FnoModel& model, const WindowDataset& dataset);

} // namespace thermoforge
