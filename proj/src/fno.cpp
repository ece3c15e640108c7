#include "thermoforge/fno.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "thermoforge/binio.hpp"
#include "thermoforge/rng.hpp"

namespace thermoforge {

double gelu(double x) {
    return 0.5 * x * (1.0 + std::erf(x * 0.70710678118654752440));
}

double gelu_derivative(double x) {
    const double cdf = 0.5 * (1.0 + std::erf(x * 0.70710678118654752440));
    const double pdf = std::exp(-0.5 * x * x) * 0.39894228040143267794;
    return cdf + x * pdf;
}

FnoModel::FnoModel(const FnoConfig& cfg) : cfg_(cfg) {
    if (cfg.in_channels < 1 || cfg.width < 1 || cfg.out_channels < 1 || cfg.depth < 1)
        throw std::invalid_argument("fno: bad channel/depth configuration");
    if (cfg.modes[0] < 1 || cfg.modes[1] < 1 || cfg.modes[2] < 1)
        throw std::invalid_argument("fno: modes must be >= 1");
    build_layout();
    params_.assign(blocks_.back().offset + blocks_.back().size, 0.0);
}

void FnoModel::build_layout() {
    const std::size_t A = cfg_.in_channels, C = cfg_.width, O = cfg_.out_channels;
    const std::size_t M = cfg_.mode_count();
    r_block_ = M * C * C;
    w_block_ = C * C;
    std::size_t off = 0;
    auto add = [&](const std::string& name, std::size_t size) {
        blocks_.push_back({name, off, size});
        off += size;
    };
    add("lift_w", A * C);
    off_lift_w_ = blocks_.back().offset;
    add("lift_b", C);
    off_lift_b_ = blocks_.back().offset;
    off_layers_ = off;
    for (int t = 0; t < cfg_.depth; ++t) {
        const std::string tag = "layer" + std::to_string(t);
        add(tag + ".r_re", r_block_);
        add(tag + ".r_im", r_block_);
        add(tag + ".w", w_block_);
        add(tag + ".w_b", C);
    }
    stride_layer_ = 2 * r_block_ + w_block_ + C;
    add("proj1_w", C * C);
    off_proj1_w_ = blocks_.back().offset;
    add("proj1_b", C);
    off_proj1_b_ = blocks_.back().offset;
    add("proj2_w", C * O);
    off_proj2_w_ = blocks_.back().offset;
    add("proj2_b", O);
    off_proj2_b_ = blocks_.back().offset;
}

FnoModel FnoModel::random_init(const FnoConfig& cfg, std::uint64_t seed) {
    FnoModel m(cfg);
    Rng rng(mix_seed(seed, 0xf40));
    auto uniform_fill = [&](std::size_t off, std::size_t n, double bound) {
        for (std::size_t i = 0; i < n; ++i) m.params_[off + i] = rng.uniform(-bound, bound);
    };
    const std::size_t A = cfg.in_channels, C = cfg.width, O = cfg.out_channels;
    const double lift_bound = 1.0 / std::sqrt(static_cast<double>(A));
    const double w_bound = 1.0 / std::sqrt(static_cast<double>(C));
    uniform_fill(m.lift_w(), A * C, lift_bound);
    uniform_fill(m.lift_b(), C, lift_bound);

    // Spectral weights: i.i.d. complex, total variance 1/(width * retained
    // mode fraction) on the reference grid (2m-1 per axis), so layer outputs
    // start at O(1) variance.
    const double nref = static_cast<double>(2 * cfg.modes[0] - 1) *
                        (2 * cfg.modes[1] - 1) * (2 * cfg.modes[2] - 1);
    const double fraction = 2.0 * cfg.mode_count() / nref;
    const double comp_std = std::sqrt(0.5 / (cfg.width * fraction));
    for (int t = 0; t < cfg.depth; ++t) {
        for (std::size_t i = 0; i < m.r_block_; ++i)
            m.params_[m.layer_r_re(t) + i] = comp_std * rng.normal();
        for (std::size_t i = 0; i < m.r_block_; ++i)
            m.params_[m.layer_r_im(t) + i] = comp_std * rng.normal();
        uniform_fill(m.layer_w(t), C * C, w_bound);
        uniform_fill(m.layer_wb(t), C, w_bound);
    }
    uniform_fill(m.proj1_w(), C * C, w_bound);
    uniform_fill(m.proj1_b(), C, w_bound);
    uniform_fill(m.proj2_w(), C * O, w_bound);
    uniform_fill(m.proj2_b(), O, w_bound);
    return m;
}

void FnoModel::save(const std::string& path, const nlohmann::json& sidecar_meta) const {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open for write: " + path);
    write_magic(os, "FNOCKPT1");
    write_le<std::uint32_t>(os, static_cast<std::uint32_t>(cfg_.in_channels));
    write_le<std::uint32_t>(os, static_cast<std::uint32_t>(cfg_.width));
    write_le<std::uint32_t>(os, static_cast<std::uint32_t>(cfg_.out_channels));
    write_le<std::uint32_t>(os, static_cast<std::uint32_t>(cfg_.depth));
    for (int a = 0; a < 3; ++a)
        write_le<std::uint32_t>(os, static_cast<std::uint32_t>(cfg_.modes[a]));
    for (double p : params_) write_le<double>(os, p);
    if (!os) throw std::runtime_error("write failed: " + path);

    std::ofstream ms(path + ".meta.json");
    if (!ms) throw std::runtime_error("cannot open for write: " + path + ".meta.json");
    ms << sidecar_meta.dump(2) << "\n";
}

FnoModel FnoModel::load(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open: " + path);
    expect_magic(is, "FNOCKPT1", path);
    FnoConfig cfg;
    cfg.in_channels = static_cast<int>(read_le<std::uint32_t>(is));
    cfg.width = static_cast<int>(read_le<std::uint32_t>(is));
    cfg.out_channels = static_cast<int>(read_le<std::uint32_t>(is));
    cfg.depth = static_cast<int>(read_le<std::uint32_t>(is));
    for (int a = 0; a < 3; ++a)
        cfg.modes[a] = static_cast<int>(read_le<std::uint32_t>(is));
    FnoModel m(cfg);
    for (double& p : m.params_) p = read_le<double>(is);
    return m;
}

FnoExecutor::FnoExecutor(const FnoModel& model, const Grid3& grid)
    : model_(model),
      grid_(grid),
      plan_(grid, model.config().modes, model.config().width) {
    const auto& cfg = model.config();
    const std::size_t N = grid.count(), C = cfg.width;
    const std::size_t M = cfg.mode_count();
    plan_.init_work(work_);
    rt_re_.resize(static_cast<std::size_t>(cfg.depth) * M * C * C);
    rt_im_.resize(rt_re_.size());
    wt_.resize(static_cast<std::size_t>(cfg.depth) * C * C + C * C); // layers + proj1
    v_.resize((cfg.depth + 1) * N * C);
    u_.resize(static_cast<std::size_t>(cfg.depth) * N * C);
    xhat_re_.resize(static_cast<std::size_t>(cfg.depth) * M * C);
    xhat_im_.resize(xhat_re_.size());
    yhat_re_.resize(M * C);
    yhat_im_.resize(M * C);
    proj_z_.resize(N * C);
    proj_zg_.resize(N * C);
    input_.resize(N * cfg.in_channels);
    field_scratch_.resize(N * C);
    refresh();
}

void FnoExecutor::refresh() {
    const auto& cfg = model_.config();
    const std::size_t C = cfg.width;
    const std::size_t M = cfg.mode_count();
    const double* p = model_.params().data();
    for (int t = 0; t < cfg.depth; ++t) {
        const double* rre = p + model_.layer_r_re(t);
        const double* rim = p + model_.layer_r_im(t);
        double* tre = rt_re_.data() + static_cast<std::size_t>(t) * M * C * C;
        double* tim = rt_im_.data() + static_cast<std::size_t>(t) * M * C * C;
        for (std::size_t m = 0; m < M; ++m)
            for (std::size_t ci = 0; ci < C; ++ci)
                for (std::size_t co = 0; co < C; ++co) {
                    tre[(m * C + co) * C + ci] = rre[(m * C + ci) * C + co];
                    tim[(m * C + co) * C + ci] = rim[(m * C + ci) * C + co];
                }
        const double* w = p + model_.layer_w(t);
        double* wt = wt_.data() + static_cast<std::size_t>(t) * C * C;
        for (std::size_t ci = 0; ci < C; ++ci)
            for (std::size_t co = 0; co < C; ++co) wt[co * C + ci] = w[ci * C + co];
    }
    const double* q1 = p + model_.proj1_w();
    double* qt = wt_.data() + static_cast<std::size_t>(cfg.depth) * C * C;
    for (std::size_t ci = 0; ci < C; ++ci)
        for (std::size_t co = 0; co < C; ++co) qt[co * C + ci] = q1[ci * C + co];
    have_forward_ = false;
}

namespace {

// out[p][co] (+)= b[co] + sum_ci in[p][ci] * w[ci][co]
void affine_pointwise(const double* in, std::size_t npoints, std::size_t cin,
                      const double* w, const double* b, std::size_t cout, double* out) {
    for (std::size_t p = 0; p < npoints; ++p) {
        double* o = out + p * cout;
        for (std::size_t co = 0; co < cout; ++co) o[co] = b[co];
        const double* row = in + p * cin;
        for (std::size_t ci = 0; ci < cin; ++ci) {
            const double x = row[ci];
            const double* wr = w + ci * cout;
            for (std::size_t co = 0; co < cout; ++co) o[co] += x * wr[co];
        }
    }
}

} // namespace

void FnoExecutor::spectral_forward(int layer, const double* v, double* s_out) {
    const auto& cfg = model_.config();
    const std::size_t C = cfg.width;
    const std::size_t M = cfg.mode_count();
    double* xre = xhat_re_.data() + static_cast<std::size_t>(layer) * M * C;
    double* xim = xhat_im_.data() + static_cast<std::size_t>(layer) * M * C;
    plan_.forward(v, xre, xim, work_);

    const double* rre = model_.params().data() + model_.layer_r_re(layer);
    const double* rim = model_.params().data() + model_.layer_r_im(layer);
    // Per-mode channel mixing. Mode 0 is the self-conjugate DC triple: only
    // the real part of R acts there and the imaginary output stays zero.
    {
        double* yre = yhat_re_.data();
        double* yim = yhat_im_.data();
        for (std::size_t co = 0; co < C; ++co) { yre[co] = 0.0; yim[co] = 0.0; }
        for (std::size_t ci = 0; ci < C; ++ci) {
            const double xr = xre[ci];
            const double* rr = rre + ci * C;
            for (std::size_t co = 0; co < C; ++co) yre[co] += xr * rr[co];
        }
    }
    for (std::size_t m = 1; m < M; ++m) {
        double* yre = yhat_re_.data() + m * C;
        double* yim = yhat_im_.data() + m * C;
        const double* xr_row = xre + m * C;
        const double* xi_row = xim + m * C;
        for (std::size_t co = 0; co < C; ++co) { yre[co] = 0.0; yim[co] = 0.0; }
        const double* rr_base = rre + m * C * C;
        const double* ri_base = rim + m * C * C;
        for (std::size_t ci = 0; ci < C; ++ci) {
            const double xr = xr_row[ci], xi = xi_row[ci];
            const double* rr = rr_base + ci * C;
            const double* ri = ri_base + ci * C;
            for (std::size_t co = 0; co < C; ++co) {
                yre[co] += xr * rr[co] - xi * ri[co];
                yim[co] += xi * rr[co] + xr * ri[co];
            }
        }
    }
    const double scale = 2.0 / static_cast<double>(grid_.count());
    plan_.inverse(yhat_re_.data(), yhat_im_.data(), s_out, scale, /*halve_dc=*/true, work_);
}

void FnoExecutor::forward(const double* input, double* output) {
    const auto& cfg = model_.config();
    const std::size_t N = grid_.count(), A = cfg.in_channels, C = cfg.width,
                      O = cfg.out_channels;
    for (std::size_t i = 0; i < N * A; ++i)
        if (!std::isfinite(input[i]))
            throw std::invalid_argument("fno forward: non-finite input");
    std::memcpy(input_.data(), input, N * A * sizeof(double));

    const double* p = model_.params().data();
    affine_pointwise(input, N, A, p + model_.lift_w(), p + model_.lift_b(), C, v_.data());

    const bool use_gelu = cfg.activation == Activation::gelu;
    for (int t = 0; t < cfg.depth; ++t) {
        const double* vt = v_.data() + static_cast<std::size_t>(t) * N * C;
        double* ut = u_.data() + static_cast<std::size_t>(t) * N * C;
        spectral_forward(t, vt, field_scratch_.data());
        affine_pointwise(vt, N, C, p + model_.layer_w(t), p + model_.layer_wb(t), C, ut);
        for (std::size_t i = 0; i < N * C; ++i) ut[i] += field_scratch_[i];
        double* vnext = v_.data() + static_cast<std::size_t>(t + 1) * N * C;
        if (t < cfg.depth - 1 && use_gelu) {
            for (std::size_t i = 0; i < N * C; ++i) vnext[i] = gelu(ut[i]);
        } else {
            std::memcpy(vnext, ut, N * C * sizeof(double));
        }
    }

    const double* vT = v_.data() + static_cast<std::size_t>(cfg.depth) * N * C;
    affine_pointwise(vT, N, C, p + model_.proj1_w(), p + model_.proj1_b(), C, proj_z_.data());
    if (use_gelu) {
        for (std::size_t i = 0; i < N * C; ++i) proj_zg_[i] = gelu(proj_z_[i]);
    } else {
        std::memcpy(proj_zg_.data(), proj_z_.data(), N * C * sizeof(double));
    }
    affine_pointwise(proj_zg_.data(), N, C, p + model_.proj2_w(), p + model_.proj2_b(), O,
                     output);
    have_forward_ = true;
}

void FnoExecutor::spectral_backward(int layer, const double* u_bar, double* v_bar,
                                    std::vector<double>& grad) {
    const auto& cfg = model_.config();
    const std::size_t C = cfg.width;
    const std::size_t M = cfg.mode_count();
    plan_.inverse_adjoint(u_bar, yhat_re_.data(), yhat_im_.data(), work_);

    const double* xre = xhat_re_.data() + static_cast<std::size_t>(layer) * M * C;
    const double* xim = xhat_im_.data() + static_cast<std::size_t>(layer) * M * C;
    const double* tre = rt_re_.data() + static_cast<std::size_t>(layer) * M * C * C;
    const double* tim = rt_im_.data() + static_cast<std::size_t>(layer) * M * C * C;
    double* gre = grad.data() + model_.layer_r_re(layer);
    double* gim = grad.data() + model_.layer_r_im(layer);

    // xbar reuses the yhat scratch once ybar is consumed per mode, so keep
    // dedicated slices instead.
    xbar_re_.assign(M * C, 0.0);
    xbar_im_.assign(M * C, 0.0);

    // DC triple: real path only; Im(R[0]) and Im(Xbar[0]) stay exactly zero.
    {
        const double* yre = yhat_re_.data();
        double* xbr = xbar_re_.data();
        for (std::size_t ci = 0; ci < C; ++ci) {
            const double xr = xre[ci];
            double* gr = gre + ci * C;
            for (std::size_t co = 0; co < C; ++co) gr[co] += yre[co] * xr;
        }
        for (std::size_t co = 0; co < C; ++co) {
            const double yr = yre[co];
            const double* tr = tre + co * C;
            for (std::size_t ci = 0; ci < C; ++ci) xbr[ci] += tr[ci] * yr;
        }
    }
    for (std::size_t m = 1; m < M; ++m) {
        const double* yre = yhat_re_.data() + m * C;
        const double* yim = yhat_im_.data() + m * C;
        const double* xr_row = xre + m * C;
        const double* xi_row = xim + m * C;
        double* gr_base = gre + m * C * C;
        double* gi_base = gim + m * C * C;
        // dR = conj(X) outer Ybar
        for (std::size_t ci = 0; ci < C; ++ci) {
            const double xr = xr_row[ci], xi = xi_row[ci];
            double* gr = gr_base + ci * C;
            double* gi = gi_base + ci * C;
            for (std::size_t co = 0; co < C; ++co) {
                gr[co] += yre[co] * xr + yim[co] * xi;
                gi[co] += yim[co] * xr - yre[co] * xi;
            }
        }
        // Xbar = R^H Ybar
        double* xbr = xbar_re_.data() + m * C;
        double* xbi = xbar_im_.data() + m * C;
        const double* tr_base = tre + m * C * C;
        const double* ti_base = tim + m * C * C;
        for (std::size_t co = 0; co < C; ++co) {
            const double yr = yre[co], yi = yim[co];
            const double* tr = tr_base + co * C;
            const double* ti = ti_base + co * C;
            for (std::size_t ci = 0; ci < C; ++ci) {
                xbr[ci] += tr[ci] * yr + ti[ci] * yi;
                xbi[ci] += tr[ci] * yi - ti[ci] * yr;
            }
        }
    }
    // Adjoint of the forward transform, accumulated into v_bar.
    plan_.inverse(xbar_re_.data(), xbar_im_.data(), field_scratch_.data(), 1.0,
                  /*halve_dc=*/false, work_);
    const std::size_t NC = grid_.count() * C;
    for (std::size_t i = 0; i < NC; ++i) v_bar[i] += field_scratch_[i];
}

void FnoExecutor::backward(const double* upstream, std::vector<double>& grad) {
    if (!have_forward_)
        throw std::logic_error("fno backward: no cached forward activations");
    const auto& cfg = model_.config();
    const std::size_t N = grid_.count(), A = cfg.in_channels, C = cfg.width,
                      O = cfg.out_channels;
    if (grad.size() != model_.param_count())
        throw std::invalid_argument("fno backward: grad buffer size mismatch");
    const double* p = model_.params().data();
    const bool use_gelu = cfg.activation == Activation::gelu;

    bar_a_.assign(N * C, 0.0);
    bar_b_.assign(N * C, 0.0);
    double* zg_bar = bar_a_.data();

    // Projection stage 2.
    {
        const double* q2 = p + model_.proj2_w();
        double* gw = grad.data() + model_.proj2_w();
        double* gb = grad.data() + model_.proj2_b();
        for (std::size_t pt = 0; pt < N; ++pt) {
            const double* up = upstream + pt * O;
            const double* zg = proj_zg_.data() + pt * C;
            for (std::size_t o = 0; o < O; ++o) gb[o] += up[o];
            for (std::size_t c = 0; c < C; ++c) {
                const double* qrow = q2 + c * O;
                double* grow = gw + c * O;
                double acc = 0.0;
                for (std::size_t o = 0; o < O; ++o) {
                    grow[o] += zg[c] * up[o];
                    acc += qrow[o] * up[o];
                }
                zg_bar[pt * C + c] = acc;
            }
        }
    }
    // GELU between projection stages.
    if (use_gelu)
        for (std::size_t i = 0; i < N * C; ++i) zg_bar[i] *= gelu_derivative(proj_z_[i]);

    // Projection stage 1: grads and v_T bar.
    double* vbar = bar_b_.data(); // v_bar for the layer below
    {
        const double* vT = v_.data() + static_cast<std::size_t>(cfg.depth) * N * C;
        double* gw = grad.data() + model_.proj1_w();
        double* gb = grad.data() + model_.proj1_b();
        const double* qt = wt_.data() + static_cast<std::size_t>(cfg.depth) * C * C;
        for (std::size_t pt = 0; pt < N; ++pt) {
            const double* zb = zg_bar + pt * C;
            const double* vrow = vT + pt * C;
            double* vb = vbar + pt * C;
            for (std::size_t co = 0; co < C; ++co) gb[co] += zb[co];
            for (std::size_t ci = 0; ci < C; ++ci) {
                const double x = vrow[ci];
                double* grow = gw + ci * C;
                for (std::size_t co = 0; co < C; ++co) grow[co] += x * zb[co];
            }
            for (std::size_t co = 0; co < C; ++co) {
                const double y = zb[co];
                const double* trow = qt + co * C;
                for (std::size_t ci = 0; ci < C; ++ci) vb[ci] += trow[ci] * y;
            }
        }
    }

    // Spectral layers, deepest first. bar_b_ holds v_bar_{t+1}; bar_a_ is
    // reused for u_bar and then the next v_bar.
    for (int t = cfg.depth - 1; t >= 0; --t) {
        double* ubar = bar_a_.data();
        const double* vnext_bar = bar_b_.data();
        if (t < cfg.depth - 1 && use_gelu) {
            const double* ut = u_.data() + static_cast<std::size_t>(t) * N * C;
            for (std::size_t i = 0; i < N * C; ++i)
                ubar[i] = vnext_bar[i] * gelu_derivative(ut[i]);
        } else {
            std::memcpy(ubar, vnext_bar, N * C * sizeof(double));
        }

        const double* vt = v_.data() + static_cast<std::size_t>(t) * N * C;
        double* gw = grad.data() + model_.layer_w(t);
        double* gb = grad.data() + model_.layer_wb(t);
        double* vtbar = bar_b_.data();
        std::fill(vtbar, vtbar + N * C, 0.0);
        const double* wt = wt_.data() + static_cast<std::size_t>(t) * C * C;
        for (std::size_t pt = 0; pt < N; ++pt) {
            const double* ub = ubar + pt * C;
            const double* vrow = vt + pt * C;
            double* vb = vtbar + pt * C;
            for (std::size_t co = 0; co < C; ++co) gb[co] += ub[co];
            for (std::size_t ci = 0; ci < C; ++ci) {
                const double x = vrow[ci];
                double* grow = gw + ci * C;
                for (std::size_t co = 0; co < C; ++co) grow[co] += x * ub[co];
            }
            for (std::size_t co = 0; co < C; ++co) {
                const double y = ub[co];
                const double* trow = wt + co * C;
                for (std::size_t ci = 0; ci < C; ++ci) vb[ci] += trow[ci] * y;
            }
        }
        spectral_backward(t, ubar, vtbar, grad);
        // vtbar (in bar_b_) is now v_bar_t; loop continues with it as the
        // incoming cotangent.
    }

    // Lift.
    {
        const double* v0bar = bar_b_.data();
        double* gw = grad.data() + model_.lift_w();
        double* gb = grad.data() + model_.lift_b();
        for (std::size_t pt = 0; pt < N; ++pt) {
            const double* vb = v0bar + pt * C;
            const double* arow = input_.data() + pt * A;
            for (std::size_t co = 0; co < C; ++co) gb[co] += vb[co];
            for (std::size_t ci = 0; ci < A; ++ci) {
                const double x = arow[ci];
                double* grow = gw + ci * C;
                for (std::size_t co = 0; co < C; ++co) grow[co] += x * vb[co];
            }
        }
    }
}

TrainState make_train_state(const FnoModel& model, double lr, double weight_decay) {
    TrainState st;
    st.m.assign(model.param_count(), 0.0);
    st.v.assign(model.param_count(), 0.0);
    st.lr = lr;
    st.weight_decay = weight_decay;
    return st;
}

void adam_step(std::vector<double>& params, const std::vector<double>& grad,
               TrainState& state) {
    if (params.size() != grad.size() || params.size() != state.m.size())
        throw std::invalid_argument("adam_step: shape mismatch");
    for (double g : grad)
        if (!std::isfinite(g)) throw std::runtime_error("adam_step: non-finite gradient");
    state.step += 1;
    const double b1 = state.beta1, b2 = state.beta2;
    const double bc1 = 1.0 - std::pow(b1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(b2, static_cast<double>(state.step));
    for (std::size_t i = 0; i < params.size(); ++i) {
        const double g = grad[i];
        state.m[i] = b1 * state.m[i] + (1.0 - b1) * g;
        state.v[i] = b2 * state.v[i] + (1.0 - b2) * g * g;
        const double mhat = state.m[i] / bc1;
        const double vhat = state.v[i] / bc2;
        // decoupled weight decay, applied to the pre-update parameter
        params[i] -= state.lr * (mhat / (std::sqrt(vhat) + state.eps) +
                                 state.weight_decay * params[i]);
    }
}

} // namespace thermoforge
