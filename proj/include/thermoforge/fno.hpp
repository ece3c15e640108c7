#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "thermoforge/fft.hpp"
#include "thermoforge/grid.hpp"

namespace thermoforge {

enum class Activation { gelu, identity };

struct FnoConfig {
    int in_channels = 8;  // lifted input channels
    int width = 32;       // latent channels
    int out_channels = 1;
    int depth = 4;        // spectral layers
    std::array<int, 3> modes = {6, 6, 6};
    // Runtime evaluation device (linear-operator checks); checkpoints always
    // describe GELU models.
    Activation activation = Activation::gelu;

    int mode_count() const { return modes[0] * modes[1] * modes[2]; }
};

struct ParamBlock {
    std::string name;
    std::size_t offset = 0;
    std::size_t size = 0;
};

// Lift -> depth x (pointwise affine + truncated spectral convolution, GELU
// between layers) -> two-stage projection with GELU between stages. All
// parameters live in one flat vector; blocks() documents the layout, which is
// also the checkpoint order.
class FnoModel {
public:
    explicit FnoModel(const FnoConfig& cfg);               // zero-initialized
    static FnoModel random_init(const FnoConfig& cfg, std::uint64_t seed);

    const FnoConfig& config() const { return cfg_; }
    const std::vector<ParamBlock>& blocks() const { return blocks_; }
    std::vector<double>& params() { return params_; }
    const std::vector<double>& params() const { return params_; }
    std::size_t param_count() const { return params_.size(); }

    // Block offsets (see layout in fno.cpp).
    std::size_t lift_w() const { return off_lift_w_; }
    std::size_t lift_b() const { return off_lift_b_; }
    std::size_t layer_r_re(int t) const { return off_layers_ + stride_layer_ * t; }
    std::size_t layer_r_im(int t) const { return layer_r_re(t) + r_block_; }
    std::size_t layer_w(int t) const { return layer_r_im(t) + r_block_; }
    std::size_t layer_wb(int t) const { return layer_w(t) + w_block_; }
    std::size_t proj1_w() const { return off_proj1_w_; }
    std::size_t proj1_b() const { return off_proj1_b_; }
    std::size_t proj2_w() const { return off_proj2_w_; }
    std::size_t proj2_b() const { return off_proj2_b_; }

    void save(const std::string& path, const nlohmann::json& sidecar_meta) const;
    static FnoModel load(const std::string& path);

private:
    void build_layout();

    FnoConfig cfg_;
    std::vector<double> params_;
    std::vector<ParamBlock> blocks_;
    std::size_t off_lift_w_ = 0, off_lift_b_ = 0, off_layers_ = 0;
    std::size_t off_proj1_w_ = 0, off_proj1_b_ = 0, off_proj2_w_ = 0, off_proj2_b_ = 0;
    std::size_t r_block_ = 0, w_block_ = 0, stride_layer_ = 0;
};

// Evaluation/backprop engine bound to one model and one grid. Holds the
// spectral plan, cached weight transposes, and all per-sample scratch; not
// thread-safe, use one executor per thread.
class FnoExecutor {
public:
    FnoExecutor(const FnoModel& model, const Grid3& grid);

    // Rebuild weight caches after parameter updates.
    void refresh();

    const Grid3& grid() const { return grid_; }
    std::size_t points() const { return grid_.count(); }

    // input: [point][in_channels], channel-fastest; output: [point][out_channels].
    // Rejects non-finite input. Keeps activations for a following backward().
    void forward(const double* input, double* output);

    // Accumulate parameter gradients for upstream [point][out_channels] into
    // grad (size = model.param_count()). Requires a preceding forward() on the
    // same input (activations are cached).
    void backward(const double* upstream, std::vector<double>& grad);

private:
    void spectral_forward(int layer, const double* v, double* s_out);
    void spectral_backward(int layer, const double* u_bar, double* v_bar,
                           std::vector<double>& grad);

    const FnoModel& model_;
    Grid3 grid_;
    SpectralPlan plan_;
    SpectralWork work_;

    // caches refreshed per parameter snapshot
    std::vector<double> rt_re_, rt_im_; // [layer][mode][out][in]
    std::vector<double> wt_;            // [layer][out][in]

    // forward stashes
    std::vector<double> v_;       // [depth+1][point][width]
    std::vector<double> u_;       // [depth][point][width] pre-activation
    std::vector<double> xhat_re_, xhat_im_; // [depth][mode][width]
    std::vector<double> yhat_re_, yhat_im_; // scratch [mode][width]
    std::vector<double> xbar_re_, xbar_im_; // scratch [mode][width]
    std::vector<double> proj_z_, proj_zg_;  // [point][width]
    std::vector<double> input_;             // [point][in_channels]
    std::vector<double> field_scratch_;     // [point][width]
    std::vector<double> bar_a_, bar_b_;     // backward cotangent ping-pong
    bool have_forward_ = false;
};

// Adam with decoupled weight decay. Moments mirror the flat parameter vector.
struct TrainState {
    std::vector<double> m, v;
    std::int64_t step = 0;
    double lr = 1e-3;
    double weight_decay = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

TrainState make_train_state(const FnoModel& model, double lr, double weight_decay);

// One optimizer step; throws on non-finite gradients.
void adam_step(std::vector<double>& params, const std::vector<double>& grad,
               TrainState& state);

double gelu(double x);
double gelu_derivative(double x);

} // namespace thermoforge
