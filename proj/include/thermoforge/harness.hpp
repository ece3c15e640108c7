#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "thermoforge/fno.hpp"
#include "thermoforge/geometry.hpp"
#include "thermoforge/material.hpp"
#include "thermoforge/metrics.hpp"
#include "thermoforge/training.hpp"
#include "thermoforge/windowing.hpp"

namespace thermoforge {

struct GeometrySpec {
    std::uint64_t seed = 1;
    ShapeFamily family = ShapeFamily::carved;
    Grid3 dims{12, 12, 12};
};

struct ProcessParams {
    double tool_speed_mm_s = 5.0;
    int substrate_layers = 2;
    double ambient_T_C = 25.0;
    double dirichlet_T_C = 25.0;
    std::optional<double> element_size_mm; // default: 40 mm / max(dims)
};

struct WindowParams {
    int edge = 11;
    int k_recent = 10;
    std::size_t max_per_geometry = 0; // 0 = keep all
    std::uint64_t sample_seed = 1;
};

struct ReportParams {
    std::size_t worst_k = 7;
};

struct RunConfig {
    int schema = 1;
    std::vector<GeometrySpec> geometries;
    ProcessParams process;
    MaterialModel material;
    WindowParams windows;
    FnoConfig fno;
    TrainOptions training;
    ReportParams report;
    bool deterministic = false;
};

RunConfig config_from_json(const nlohmann::json& j);
nlohmann::ordered_json config_to_json(const RunConfig& cfg);
RunConfig load_config(const std::string& path);

// Geometry -> domain -> schedule -> simulated history -> window dataset.
struct GeometryRun {
    VoxelPart part;
    BuildDomain domain;
    ActivationSchedule schedule;
};

GeometryRun prepare_geometry(const RunConfig& cfg, const GeometrySpec& spec);
WindowDataset dataset_for_geometry(const RunConfig& cfg, const GeometrySpec& spec,
                                   std::uint32_t geometry_id);

struct FoldResult {
    std::uint32_t held_out_geometry = 0;
    std::vector<std::uint32_t> train_geometries;
    std::size_t train_window_count = 0;
    std::size_t test_window_count = 0;
    std::size_t validation_window_count = 0;
    MetricSet validation;
    std::size_t validation_degenerate = 0;
    std::vector<WorstWindow> worst_windows;
    std::vector<EpochMetrics> curves;
    std::string error; // empty on success
};

struct CrossvalReport {
    RunConfig config;
    std::vector<FoldResult> folds;
};

// Leave-one-geometry-out: pool the other geometries' windows, 90/10 split,
// train, validate on the held-out geometry's full window set. A failed fold
// is recorded and does not abort the remaining folds.
CrossvalReport crossval(const RunConfig& cfg);

nlohmann::ordered_json crossval_to_json(const CrossvalReport& report);

// Fig.-7-style per-epoch curves: epoch, train_mse, test_mse, train_nl2,
// test_nl2, train_r2, test_r2.
void write_curves_csv(const std::vector<EpochMetrics>& history, const std::string& path);

nlohmann::ordered_json evaluation_report(const std::vector<WindowScore>& scores,
                                         std::size_t worst_k, bool per_window);

} // namespace thermoforge
