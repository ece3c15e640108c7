#include "thermoforge/training.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "thermoforge/log.hpp"
#include "thermoforge/rng.hpp"

namespace thermoforge {

void assemble_input(const WindowSample& sample, int edge, const DatasetNorm& norm,
                    double* out) {
    const std::size_t block = static_cast<std::size_t>(edge) * edge * edge;
    const float* tin = sample.channel(kTin, edge);
    const float* rho = sample.channel(kRhoAct, edge);
    const float* power = sample.channel(kPower, edge);
    const float* dx = sample.channel(kDx, edge);
    const float* dy = sample.channel(kDy, edge);
    const float* dz = sample.channel(kDz, edge);
    const float* dcv = sample.channel(kDConv, edge);
    const float* ddr = sample.channel(kDDirichlet, edge);
    const double t_scale = norm.activation_T - norm.ambient_T;
    const double d_scale = norm.dist_scale_mm;
    for (std::size_t p = 0; p < block; ++p) {
        double* row = out + p * 8;
        row[0] = (tin[p] - norm.ambient_T) / t_scale;
        row[1] = rho[p];
        row[2] = power[p];
        row[3] = dx[p];
        row[4] = dy[p];
        row[5] = dz[p];
        row[6] = dcv[p] / d_scale;
        row[7] = ddr[p] / d_scale;
    }
}

namespace {

struct SampleEval {
    std::vector<double> pred;  // de-normalized °C
    std::vector<double> truth; // °C
    std::vector<std::uint8_t> mask;
};

void run_sample(FnoExecutor& exec, const WindowSample& sample, int edge,
                const DatasetNorm& norm, std::vector<double>& input,
                std::vector<double>& output, SampleEval& eval) {
    const std::size_t block = static_cast<std::size_t>(edge) * edge * edge;
    assemble_input(sample, edge, norm, input.data());
    exec.forward(input.data(), output.data());
    const double t_scale = norm.activation_T - norm.ambient_T;
    const float* tout = sample.channel(kTout, edge);
    const float* msk = sample.channel(kMask, edge);
    eval.pred.resize(block);
    eval.truth.resize(block);
    eval.mask.resize(block);
    for (std::size_t p = 0; p < block; ++p) {
        eval.pred[p] = output[p] * t_scale + norm.ambient_T;
        eval.truth[p] = tout[p];
        eval.mask[p] = msk[p] >= 0.5f ? 1 : 0;
    }
}

MetricSet summarize(const std::vector<WindowScore>& scores) {
    const AggregateReport rep = aggregate(scores, 1);
    return {rep.mean_mse, rep.mean_nrmse, rep.mean_nl2, rep.mean_r2};
}

} // namespace

TrainResult train_fno(const FnoConfig& cfg, const WindowDataset& dataset,
                      const TrainOptions& opts) {
    const std::size_t n = dataset.samples.size();
    if (n == 0) throw std::invalid_argument("train: empty dataset");
    if (opts.batch_size < 1 || opts.epochs < 1)
        throw std::invalid_argument("train: bad batch size or epoch count");

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    Rng split_rng(mix_seed(opts.split_seed, 0x517));
    split_rng.shuffle(order);
    const std::size_t n_train =
        static_cast<std::size_t>(std::llround(opts.split_fraction * static_cast<double>(n)));
    if (n_train == 0 || n_train == n)
        throw std::invalid_argument("train: split leaves an empty set");

    TrainResult result{FnoModel::random_init(cfg, opts.init_seed), {}, {}, {}};
    result.train_indices.assign(order.begin(), order.begin() + n_train);
    result.test_indices.assign(order.begin() + n_train, order.end());

    const int edge = dataset.edge;
    const Grid3 grid{edge, edge, edge};
    FnoExecutor exec(result.model, grid);
    TrainState state = make_train_state(result.model, opts.lr, opts.weight_decay);

    const std::size_t block = static_cast<std::size_t>(edge) * edge * edge;
    std::vector<double> input(block * cfg.in_channels);
    std::vector<double> output(block * cfg.out_channels);
    std::vector<double> upstream(block * cfg.out_channels);
    std::vector<double> grad(result.model.param_count());
    SampleEval eval;
    const double t_scale = dataset.norm.activation_T - dataset.norm.ambient_T;

    std::vector<std::size_t> epoch_order = result.train_indices;
    for (int e = 0; e < opts.epochs; ++e) {
        Rng shuffle_rng(mix_seed(opts.split_seed, 0xe90c + static_cast<std::uint64_t>(e)));
        shuffle_rng.shuffle(epoch_order);

        std::vector<WindowScore> train_scores;
        train_scores.reserve(epoch_order.size());
        for (std::size_t start = 0; start < epoch_order.size(); start += opts.batch_size) {
            const std::size_t stop =
                std::min(epoch_order.size(), start + static_cast<std::size_t>(opts.batch_size));
            const double inv_batch = 1.0 / static_cast<double>(stop - start);
            std::fill(grad.begin(), grad.end(), 0.0);
            exec.refresh();
            for (std::size_t bi = start; bi < stop; ++bi) {
                const WindowSample& s = dataset.samples[epoch_order[bi]];
                run_sample(exec, s, edge, dataset.norm, input, output, eval);
                train_scores.push_back(score_window(eval.pred, eval.truth, eval.mask));
                for (std::size_t p = 0; p < block; ++p) {
                    if (!eval.mask[p]) {
                        upstream[p] = 0.0;
                        continue;
                    }
                    const double truth = eval.truth[p];
                    if (truth == 0.0)
                        throw std::runtime_error("train: masked-in zero ground truth");
                    const double diff = eval.pred[p] - truth;
                    const double sign = (diff > 0.0) - (diff < 0.0);
                    upstream[p] = inv_batch * sign / std::abs(truth) * t_scale;
                }
                exec.backward(upstream.data(), grad);
            }
            adam_step(result.model.params(), grad, state);
        }
        exec.refresh();

        std::vector<WindowScore> test_scores;
        test_scores.reserve(result.test_indices.size());
        for (std::size_t idx : result.test_indices) {
            run_sample(exec, dataset.samples[idx], edge, dataset.norm, input, output, eval);
            test_scores.push_back(score_window(eval.pred, eval.truth, eval.mask));
        }
        EpochMetrics em{summarize(train_scores), summarize(test_scores)};
        result.history.push_back(em);
        if (opts.verbose)
            log::info("epoch %d/%d train mse %.4f nl2 %.4f r2 %.6f | test mse %.4f nl2 %.4f r2 %.6f",
                      e + 1, opts.epochs, em.train.mse, em.train.nl2, em.train.r2,
                      em.test.mse, em.test.nl2, em.test.r2);
        for (const auto& m : {em.train, em.test})
            if (!std::isfinite(m.mse) || !std::isfinite(m.nl2))
                throw std::runtime_error("train: non-finite epoch metrics");
    }
    return result;
}

std::vector<WindowScore> evaluate_model(const FnoModel& model, const WindowDataset& dataset,
                                        const std::vector<std::size_t>& indices) {
    const int edge = dataset.edge;
    const Grid3 grid{edge, edge, edge};
    FnoExecutor exec(model, grid);
    const std::size_t block = static_cast<std::size_t>(edge) * edge * edge;
    std::vector<double> input(block * model.config().in_channels);
    std::vector<double> output(block * model.config().out_channels);
    SampleEval eval;
    std::vector<WindowScore> scores;
    scores.reserve(indices.size());
    for (std::size_t idx : indices) {
        run_sample(exec, dataset.samples[idx], edge, dataset.norm, input, output, eval);
        scores.push_back(score_window(eval.pred, eval.truth, eval.mask));
    }
    return scores;
}

std::vector<WindowScore> evaluate_model(const FnoModel& model, const WindowDataset& dataset) {
    std::vector<std::size_t> idx(dataset.samples.size());
    std::iota(idx.begin(), idx.end(), 0);
    return evaluate_model(model, dataset, idx);
}

} // namespace thermoforge
