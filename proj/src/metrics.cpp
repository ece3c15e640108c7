#include "thermoforge/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace thermoforge {

namespace {

void check_shapes(std::span<const double> pred, std::span<const double> truth,
                  std::span<const std::uint8_t> mask) {
    if (pred.size() != truth.size() || pred.size() != mask.size())
        throw std::invalid_argument("metrics: shape mismatch");
}

std::size_t masked_count(std::span<const std::uint8_t> mask) {
    std::size_t n = 0;
    for (auto m : mask)
        if (m) ++n;
    return n;
}

} // namespace

double nl2(std::span<const double> pred, std::span<const double> truth,
           std::span<const std::uint8_t> mask) {
    check_shapes(pred, truth, mask);
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        if (!mask[i]) continue;
        if (truth[i] == 0.0)
            throw std::invalid_argument("nl2: masked-in zero ground truth");
        sum += std::abs(pred[i] - truth[i]) / std::abs(truth[i]);
        ++n;
    }
    if (n == 0) throw std::invalid_argument("nl2: empty mask");
    return sum;
}

double mse(std::span<const double> pred, std::span<const double> truth,
           std::span<const std::uint8_t> mask) {
    check_shapes(pred, truth, mask);
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        if (!mask[i]) continue;
        const double d = pred[i] - truth[i];
        sum += d * d;
        ++n;
    }
    if (n == 0) throw std::invalid_argument("mse: empty mask");
    return sum / static_cast<double>(n);
}

double nrmse(std::span<const double> pred, std::span<const double> truth,
             std::span<const std::uint8_t> mask) {
    check_shapes(pred, truth, mask);
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        if (!mask[i]) continue;
        if (truth[i] == 0.0)
            throw std::invalid_argument("nrmse: masked-in zero ground truth");
        const double d = (pred[i] - truth[i]) / truth[i];
        sum += d * d;
        ++n;
    }
    if (n == 0) throw std::invalid_argument("nrmse: empty mask");
    return std::sqrt(sum / static_cast<double>(n));
}

namespace {

constexpr double kVarianceFloor = 1e-12;

// Shared by r2() and score_window(); reports degeneracy instead of guessing.
double r2_impl(std::span<const double> pred, std::span<const double> truth,
               std::span<const std::uint8_t> mask, bool* degenerate) {
    const std::size_t n = masked_count(mask);
    if (n < 2) throw std::invalid_argument("r2: needs >= 2 masked voxels");
    double mean = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i)
        if (mask[i]) mean += truth[i];
    mean /= static_cast<double>(n);
    double sse = 0.0, sst = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        if (!mask[i]) continue;
        const double e = pred[i] - truth[i];
        const double v = mean - truth[i];
        sse += e * e;
        sst += v * v;
    }
    if (degenerate) *degenerate = false;
    if (sst < kVarianceFloor) {
        if (sse < kVarianceFloor) return 1.0;
        if (degenerate) *degenerate = true;
        return -std::numeric_limits<double>::infinity();
    }
    return 1.0 - sse / sst;
}

} // namespace

double r2(std::span<const double> pred, std::span<const double> truth,
          std::span<const std::uint8_t> mask) {
    check_shapes(pred, truth, mask);
    return r2_impl(pred, truth, mask, nullptr);
}

WindowScore score_window(std::span<const double> pred, std::span<const double> truth,
                         std::span<const std::uint8_t> mask) {
    check_shapes(pred, truth, mask);
    WindowScore s;
    s.n_scored = masked_count(mask);
    s.mse = mse(pred, truth, mask);
    s.nrmse = nrmse(pred, truth, mask);
    s.nl2 = nl2(pred, truth, mask);
    s.r2 = r2_impl(pred, truth, mask, &s.degenerate_r2);
    return s;
}

AggregateReport aggregate(const std::vector<WindowScore>& scores, std::size_t worst_k) {
    if (scores.empty()) throw std::invalid_argument("aggregate: no scores");
    AggregateReport rep;
    rep.window_count = scores.size();
    double r2_sum = 0.0;
    std::size_t r2_n = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        const auto& s = scores[i];
        rep.mean_mse += s.mse;
        rep.mean_nrmse += s.nrmse;
        rep.mean_nl2 += s.nl2;
        if (s.degenerate_r2) {
            ++rep.degenerate_count;
        } else {
            r2_sum += s.r2;
            ++r2_n;
        }
        rep.worst.push_back({i, s.r2});
    }
    const double n = static_cast<double>(scores.size());
    rep.mean_mse /= n;
    rep.mean_nrmse /= n;
    rep.mean_nl2 /= n;
    rep.mean_r2 = r2_n ? r2_sum / static_cast<double>(r2_n) : 0.0;
    std::stable_sort(rep.worst.begin(), rep.worst.end(),
                     [](const WorstWindow& a, const WorstWindow& b) { return a.r2 < b.r2; });
    if (rep.worst.size() > worst_k) rep.worst.resize(worst_k);
    return rep;
}

} // namespace thermoforge
