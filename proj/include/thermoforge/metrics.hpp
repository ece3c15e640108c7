#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace thermoforge {

// Per-window evaluation metrics over the masked (activated) voxels.
struct WindowScore {
    double mse = 0.0;    // °C^2
    double nrmse = 0.0;
    double nl2 = 0.0;    // per-voxel sum, as defined
    double r2 = 0.0;
    std::size_t n_scored = 0;
    bool degenerate_r2 = false; // SST ~ 0 with SSE > 0; excluded from mean r2
};

struct WorstWindow {
    std::size_t window_id = 0;
    double r2 = 0.0;
};

struct AggregateReport {
    double mean_mse = 0.0;
    double mean_nrmse = 0.0;
    double mean_nl2 = 0.0;
    double mean_r2 = 0.0;               // over non-degenerate windows
    std::size_t window_count = 0;
    std::size_t degenerate_count = 0;
    std::vector<WorstWindow> worst;     // ascending by r2
};

// Sum over masked voxels of |pred - truth| / |truth|. Masked-in zero truth is
// an error (the quotient is undefined).
double nl2(std::span<const double> pred, std::span<const double> truth,
           std::span<const std::uint8_t> mask);

double mse(std::span<const double> pred, std::span<const double> truth,
           std::span<const std::uint8_t> mask);

double nrmse(std::span<const double> pred, std::span<const double> truth,
             std::span<const std::uint8_t> mask);

// 1 - SSE/SST with the masked mean of truth as the baseline. Needs >= 2
// masked voxels. A zero-variance window yields r2 = 1 when SSE is also ~ 0,
// otherwise the degenerate flag (use score_window to see it).
double r2(std::span<const double> pred, std::span<const double> truth,
          std::span<const std::uint8_t> mask);

WindowScore score_window(std::span<const double> pred, std::span<const double> truth,
                         std::span<const std::uint8_t> mask);

AggregateReport aggregate(const std::vector<WindowScore>& scores, std::size_t worst_k);

} // namespace thermoforge
