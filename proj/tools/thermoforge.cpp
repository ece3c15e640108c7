#include <cstdio>
#include <exception>
#include <fstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "thermoforge/fno.hpp"
#include "thermoforge/geometry.hpp"
#include "thermoforge/harness.hpp"
#include "thermoforge/log.hpp"
#include "thermoforge/metrics.hpp"
#include "thermoforge/rng.hpp"
#include "thermoforge/thermal.hpp"
#include "thermoforge/toolpath.hpp"
#include "thermoforge/training.hpp"
#include "thermoforge/windowing.hpp"

using namespace thermoforge;

namespace {

RunConfig config_or_default(const std::string& path) {
    if (path.empty()) return RunConfig{};
    return load_config(path);
}

BuildDomain domain_from_part(const std::string& part_path, const RunConfig& cfg) {
    VoxelPart part = load_part(part_path);
    if (cfg.process.element_size_mm) part.element_size_mm = *cfg.process.element_size_mm;
    return attach_substrate(part, cfg.process.substrate_layers, cfg.process.ambient_T_C,
                            cfg.process.dirichlet_T_C);
}

void write_json(const nlohmann::ordered_json& j, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open for write: " + path);
    os << j.dump(2) << "\n";
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"thermoforge: voxel DED thermal simulation and local-field surrogate training"};
    app.require_subcommand(1);

    std::string config_path;
    std::uint64_t cli_seed = 0;
    bool seed_set = false;
    bool deterministic = false;
    int threads = 1;
    app.add_option("--config", config_path, "run configuration JSON")->capture_default_str();
    app.add_option("--seed", cli_seed, "override split/init/sample seeds")
        ->each([&seed_set](const std::string&) { seed_set = true; });
    app.add_flag("--deterministic", deterministic,
                 "force the documented deterministic execution mode");
    app.add_option("--threads", threads, "worker threads (current build executes serially)");

    // generate
    auto* gen = app.add_subcommand("generate", "generate a procedural voxel part");
    std::uint64_t g_seed = 1;
    std::string g_family = "carved";
    std::vector<int> g_dims{20, 20, 20};
    std::string g_out = "part.vox";
    gen->add_option("--part-seed", g_seed, "shape seed")->capture_default_str();
    gen->add_option("--family", g_family, "carved|stacked|holed")->capture_default_str();
    gen->add_option("--dims", g_dims, "grid dims nx ny nz")->expected(3);
    gen->add_option("--out", g_out, "output part file")->capture_default_str();

    // path
    auto* path_cmd = app.add_subcommand("path", "plan the serpentine toolpath");
    std::string p_part, p_out = "toolpath.txt";
    path_cmd->add_option("--domain", p_part, "part file (VOXPART1)")->required();
    path_cmd->add_option("--out", p_out, "output toolpath file")->capture_default_str();

    // simulate
    auto* sim = app.add_subcommand("simulate", "run the activation thermal simulation");
    std::string s_part, s_toolpath, s_out = "history.thist";
    sim->add_option("--domain", s_part, "part file (VOXPART1)")->required();
    sim->add_option("--toolpath", s_toolpath, "toolpath file")->required();
    sim->add_option("--out", s_out, "output history file")->capture_default_str();

    // extract
    auto* ext = app.add_subcommand("extract", "cut heat-affected windows from a history");
    std::string e_part, e_toolpath, e_history, e_out = "windows.win";
    std::uint32_t e_geometry_id = 0;
    std::size_t e_max_windows = 0;
    ext->add_option("--domain", e_part)->required();
    ext->add_option("--toolpath", e_toolpath)->required();
    ext->add_option("--history", e_history)->required();
    ext->add_option("--out", e_out)->capture_default_str();
    ext->add_option("--geometry-id", e_geometry_id)->capture_default_str();
    ext->add_option("--max-windows", e_max_windows, "subsample to at most this many windows");

    // train
    auto* tr = app.add_subcommand("train", "train the spectral surrogate");
    std::vector<std::string> t_datasets;
    std::string t_out = "model.ckpt", t_plots;
    tr->add_option("--dataset", t_datasets, "window dataset file(s)")->required();
    tr->add_option("--out", t_out)->capture_default_str();
    tr->add_option("--emit-plots", t_plots, "write per-epoch metric curves CSV");

    // evaluate
    auto* ev = app.add_subcommand("evaluate", "score a checkpoint on a dataset");
    std::string v_model, v_dataset, v_out = "report.json";
    bool v_per_window = false;
    std::size_t v_worst_k = 7;
    ev->add_option("--model", v_model)->required();
    ev->add_option("--dataset", v_dataset)->required();
    ev->add_option("--out", v_out)->capture_default_str();
    ev->add_flag("--per-window", v_per_window);
    ev->add_option("--worst-k", v_worst_k)->capture_default_str();

    // crossval
    auto* cv = app.add_subcommand("crossval", "leave-one-geometry-out cross validation");
    std::string c_out = "crossval.json", c_plots_dir;
    cv->add_option("--out", c_out)->capture_default_str();
    cv->add_option("--emit-plots", c_plots_dir, "directory for per-fold curve CSVs");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return e.get_exit_code() == 0 ? 0 : 2;
    }

    try {
        RunConfig cfg = config_or_default(config_path);
        if (seed_set) {
            cfg.training.split_seed = cli_seed;
            cfg.training.init_seed = cli_seed;
            cfg.windows.sample_seed = cli_seed;
        }
        if (deterministic) cfg.deterministic = true;
        if (threads != 1)
            log::warn("--threads %d requested; this build executes serially", threads);

        if (*gen) {
            VoxelPart part =
                generate_shape(g_seed, shape_family_from_string(g_family),
                               {g_dims[0], g_dims[1], g_dims[2]});
            if (cfg.process.element_size_mm) part.element_size_mm = *cfg.process.element_size_mm;
            save_part(part, g_out);
            std::printf("part: %zu voxels, element size %.4f mm -> %s\n", part.voxel_count(),
                        part.element_size_mm, g_out.c_str());
        } else if (*path_cmd) {
            const BuildDomain domain = domain_from_part(p_part, cfg);
            const ActivationSchedule sched = plan_zigzag(domain, cfg.process.tool_speed_mm_s);
            save_toolpath(sched, p_out);
            const ScheduleStats st = schedule_stats(sched);
            std::printf("toolpath: %zu events, dt %.6g s, duration %.6g s -> %s\n", st.count,
                        st.dt, st.duration_s, p_out.c_str());
        } else if (*sim) {
            const BuildDomain domain = domain_from_part(s_part, cfg);
            const ActivationSchedule sched = load_toolpath(s_toolpath);
            const TemperatureHistory hist = simulate(domain, sched, cfg.material);
            save_history(hist, s_out);
            std::printf("history: %zu snapshots of %zu elements -> %s\n", hist.snapshots.size(),
                        domain.dims.count(), s_out.c_str());
        } else if (*ext) {
            const BuildDomain domain = domain_from_part(e_part, cfg);
            const ActivationSchedule sched = load_toolpath(e_toolpath);
            const TemperatureHistory hist = load_history(e_history, domain.dims);
            ExtractOptions opts;
            opts.edge = cfg.windows.edge;
            opts.k_recent = cfg.windows.k_recent;
            opts.geometry_id = e_geometry_id;
            opts.activation_T = cfg.material.activation_T;
            WindowDataset ds = extract_windows(hist, sched, domain, opts);
            if (e_max_windows > 0 && ds.samples.size() > e_max_windows)
                ds = subsample(ds, e_max_windows, mix_seed(cfg.windows.sample_seed, e_geometry_id));
            save_dataset(ds, e_out);
            std::printf("windows: %zu samples (edge %d) -> %s\n", ds.samples.size(), ds.edge,
                        e_out.c_str());
        } else if (*tr) {
            std::vector<WindowDataset> parts;
            for (const auto& p : t_datasets) parts.push_back(load_dataset(p));
            const WindowDataset ds = merge(parts);
            const TrainResult result = train_fno(cfg.fno, ds, cfg.training);
            nlohmann::ordered_json meta;
            meta["training"] = {{"epochs", cfg.training.epochs},
                                {"batch_size", cfg.training.batch_size},
                                {"lr", cfg.training.lr},
                                {"weight_decay", cfg.training.weight_decay},
                                {"split_fraction", cfg.training.split_fraction},
                                {"split_seed", cfg.training.split_seed},
                                {"init_seed", cfg.training.init_seed}};
            meta["normalization"] = {{"ambient_T_C", ds.norm.ambient_T},
                                     {"activation_T_C", ds.norm.activation_T},
                                     {"dist_scale_mm", ds.norm.dist_scale_mm}};
            result.model.save(t_out, meta);
            if (!t_plots.empty()) write_curves_csv(result.history, t_plots);
            const EpochMetrics& last = result.history.back();
            std::printf("trained %d epochs: test mse %.4f nl2 %.4f r2 %.6f -> %s\n",
                        cfg.training.epochs, last.test.mse, last.test.nl2, last.test.r2,
                        t_out.c_str());
        } else if (*ev) {
            const FnoModel model = FnoModel::load(v_model);
            const WindowDataset ds = load_dataset(v_dataset);
            const std::vector<WindowScore> scores = evaluate_model(model, ds);
            write_json(evaluation_report(scores, v_worst_k, v_per_window), v_out);
            const AggregateReport agg = aggregate(scores, v_worst_k);
            std::printf("evaluated %zu windows: mse %.4f nl2 %.4f r2 %.6f -> %s\n",
                        agg.window_count, agg.mean_mse, agg.mean_nl2, agg.mean_r2,
                        v_out.c_str());
        } else if (*cv) {
            if (config_path.empty()) throw std::runtime_error("crossval requires --config");
            const CrossvalReport report = crossval(cfg);
            write_json(crossval_to_json(report), c_out);
            if (!c_plots_dir.empty()) {
                for (std::size_t f = 0; f < report.folds.size(); ++f)
                    if (report.folds[f].error.empty())
                        write_curves_csv(report.folds[f].curves,
                                         c_plots_dir + "/fold" + std::to_string(f) + ".csv");
            }
            std::printf("crossval: %zu folds -> %s\n", report.folds.size(), c_out.c_str());
        }
    } catch (const std::exception& ex) {
        std::fprintf(stderr, "error: %s\n", ex.what());
        return 1;
    }
    return 0;
}
