#include "thermoforge/harness.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>

#include "thermoforge/log.hpp"
#include "thermoforge/rng.hpp"
#include "thermoforge/thermal.hpp"
#include "thermoforge/toolpath.hpp"

namespace thermoforge {

namespace {

PropertyTable table_from_json(const nlohmann::json& j) {
    if (j.is_number()) return PropertyTable(j.get<double>());
    std::vector<std::pair<double, double>> pts;
    for (const auto& p : j) pts.emplace_back(p.at(0).get<double>(), p.at(1).get<double>());
    return PropertyTable(std::move(pts));
}

nlohmann::ordered_json table_to_json(const PropertyTable& t) {
    if (t.is_constant()) return t.points().front().second;
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& [T, v] : t.points()) arr.push_back({T, v});
    return arr;
}

} // namespace

RunConfig config_from_json(const nlohmann::json& j) {
    RunConfig cfg;
    cfg.schema = j.at("schema").get<int>();
    if (cfg.schema != 1) throw std::invalid_argument("config: unsupported schema version");
    for (const auto& g : j.at("geometries")) {
        GeometrySpec spec;
        spec.seed = g.at("seed").get<std::uint64_t>();
        spec.family = shape_family_from_string(g.at("family").get<std::string>());
        const auto& d = g.at("dims");
        spec.dims = {d.at(0).get<int>(), d.at(1).get<int>(), d.at(2).get<int>()};
        cfg.geometries.push_back(spec);
    }
    if (j.contains("process")) {
        const auto& p = j.at("process");
        if (p.contains("tool_speed_mm_s")) cfg.process.tool_speed_mm_s = p.at("tool_speed_mm_s");
        if (p.contains("substrate_layers")) cfg.process.substrate_layers = p.at("substrate_layers");
        if (p.contains("ambient_T_C")) cfg.process.ambient_T_C = p.at("ambient_T_C");
        if (p.contains("dirichlet_T_C")) cfg.process.dirichlet_T_C = p.at("dirichlet_T_C");
        if (p.contains("element_size_mm") && !p.at("element_size_mm").is_null())
            cfg.process.element_size_mm = p.at("element_size_mm").get<double>();
    }
    if (j.contains("material")) {
        const auto& m = j.at("material");
        if (m.contains("density")) cfg.material.density = table_from_json(m.at("density"));
        if (m.contains("specific_heat"))
            cfg.material.specific_heat = table_from_json(m.at("specific_heat"));
        if (m.contains("conductivity"))
            cfg.material.conductivity = table_from_json(m.at("conductivity"));
        if (m.contains("enhanced_specific_heat"))
            cfg.material.enhanced_specific_heat = m.at("enhanced_specific_heat");
        if (m.contains("activation_T_C")) cfg.material.activation_T = m.at("activation_T_C");
        if (m.contains("solidus_T_C")) cfg.material.solidus_T = m.at("solidus_T_C");
        if (m.contains("emissivity")) cfg.material.emissivity = m.at("emissivity");
        if (m.contains("h_inf_W_m2K")) cfg.material.h_inf = m.at("h_inf_W_m2K");
    }
    if (j.contains("windows")) {
        const auto& w = j.at("windows");
        if (w.contains("edge")) cfg.windows.edge = w.at("edge");
        if (w.contains("k_recent")) cfg.windows.k_recent = w.at("k_recent");
        if (w.contains("max_per_geometry"))
            cfg.windows.max_per_geometry = w.at("max_per_geometry").get<std::size_t>();
        if (w.contains("sample_seed")) cfg.windows.sample_seed = w.at("sample_seed").get<std::uint64_t>();
    }
    if (j.contains("fno")) {
        const auto& f = j.at("fno");
        if (f.contains("width")) cfg.fno.width = f.at("width");
        if (f.contains("depth")) cfg.fno.depth = f.at("depth");
        if (f.contains("modes")) {
            const auto& m = f.at("modes");
            cfg.fno.modes = {m.at(0).get<int>(), m.at(1).get<int>(), m.at(2).get<int>()};
        }
    }
    if (j.contains("training")) {
        const auto& t = j.at("training");
        if (t.contains("epochs")) cfg.training.epochs = t.at("epochs");
        if (t.contains("batch_size")) cfg.training.batch_size = t.at("batch_size");
        if (t.contains("lr")) cfg.training.lr = t.at("lr");
        if (t.contains("weight_decay")) cfg.training.weight_decay = t.at("weight_decay");
        if (t.contains("split_fraction")) cfg.training.split_fraction = t.at("split_fraction");
        if (t.contains("split_seed")) cfg.training.split_seed = t.at("split_seed").get<std::uint64_t>();
        if (t.contains("init_seed")) cfg.training.init_seed = t.at("init_seed").get<std::uint64_t>();
    }
    if (j.contains("report") && j.at("report").contains("worst_k"))
        cfg.report.worst_k = j.at("report").at("worst_k").get<std::size_t>();
    if (j.contains("deterministic")) cfg.deterministic = j.at("deterministic").get<bool>();
    return cfg;
}

nlohmann::ordered_json config_to_json(const RunConfig& cfg) {
    nlohmann::ordered_json j;
    j["schema"] = cfg.schema;
    j["geometries"] = nlohmann::ordered_json::array();
    for (const auto& g : cfg.geometries)
        j["geometries"].push_back({{"seed", g.seed},
                                   {"family", to_string(g.family)},
                                   {"dims", {g.dims.nx, g.dims.ny, g.dims.nz}}});
    j["process"] = {{"tool_speed_mm_s", cfg.process.tool_speed_mm_s},
                    {"substrate_layers", cfg.process.substrate_layers},
                    {"ambient_T_C", cfg.process.ambient_T_C},
                    {"dirichlet_T_C", cfg.process.dirichlet_T_C}};
    if (cfg.process.element_size_mm)
        j["process"]["element_size_mm"] = *cfg.process.element_size_mm;
    else
        j["process"]["element_size_mm"] = nullptr;
    j["material"] = {{"density", table_to_json(cfg.material.density)},
                     {"specific_heat", table_to_json(cfg.material.specific_heat)},
                     {"conductivity", table_to_json(cfg.material.conductivity)},
                     {"enhanced_specific_heat", cfg.material.enhanced_specific_heat},
                     {"activation_T_C", cfg.material.activation_T},
                     {"solidus_T_C", cfg.material.solidus_T},
                     {"emissivity", cfg.material.emissivity},
                     {"h_inf_W_m2K", cfg.material.h_inf}};
    j["windows"] = {{"edge", cfg.windows.edge},
                    {"k_recent", cfg.windows.k_recent},
                    {"max_per_geometry", cfg.windows.max_per_geometry},
                    {"sample_seed", cfg.windows.sample_seed}};
    j["fno"] = {{"width", cfg.fno.width},
                {"depth", cfg.fno.depth},
                {"modes", {cfg.fno.modes[0], cfg.fno.modes[1], cfg.fno.modes[2]}}};
    j["training"] = {{"epochs", cfg.training.epochs},
                     {"batch_size", cfg.training.batch_size},
                     {"lr", cfg.training.lr},
                     {"weight_decay", cfg.training.weight_decay},
                     {"split_fraction", cfg.training.split_fraction},
                     {"split_seed", cfg.training.split_seed},
                     {"init_seed", cfg.training.init_seed}};
    j["report"] = {{"worst_k", cfg.report.worst_k}};
    j["deterministic"] = cfg.deterministic;
    return j;
}

RunConfig load_config(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open config: " + path);
    return config_from_json(nlohmann::json::parse(is));
}

GeometryRun prepare_geometry(const RunConfig& cfg, const GeometrySpec& spec) {
    GeometryRun run;
    run.part = generate_shape(spec.seed, spec.family, spec.dims);
    if (cfg.process.element_size_mm) run.part.element_size_mm = *cfg.process.element_size_mm;
    run.domain = attach_substrate(run.part, cfg.process.substrate_layers,
                                  cfg.process.ambient_T_C, cfg.process.dirichlet_T_C);
    run.schedule = plan_zigzag(run.domain, cfg.process.tool_speed_mm_s);
    return run;
}

WindowDataset dataset_for_geometry(const RunConfig& cfg, const GeometrySpec& spec,
                                   std::uint32_t geometry_id) {
    GeometryRun run = prepare_geometry(cfg, spec);
    log::info("geometry %u: %zu part voxels, dt %.4f s", geometry_id,
              run.schedule.events.size(), run.schedule.dt);
    const TemperatureHistory hist = simulate(run.domain, run.schedule, cfg.material);
    ExtractOptions opts;
    opts.edge = cfg.windows.edge;
    opts.k_recent = cfg.windows.k_recent;
    opts.geometry_id = geometry_id;
    opts.activation_T = cfg.material.activation_T;
    WindowDataset ds = extract_windows(hist, run.schedule, run.domain, opts);
    ds.provenance.front().description =
        std::string(to_string(spec.family)) + " seed " + std::to_string(spec.seed);
    if (cfg.windows.max_per_geometry > 0 && ds.samples.size() > cfg.windows.max_per_geometry)
        ds = subsample(ds, cfg.windows.max_per_geometry,
                       mix_seed(cfg.windows.sample_seed, geometry_id));
    log::info("geometry %u: %zu windows", geometry_id, ds.samples.size());
    return ds;
}

CrossvalReport crossval(const RunConfig& cfg) {
    if (cfg.geometries.size() < 2)
        throw std::invalid_argument("crossval: needs >= 2 geometries");
    std::vector<WindowDataset> datasets;
    datasets.reserve(cfg.geometries.size());
    for (std::size_t g = 0; g < cfg.geometries.size(); ++g)
        datasets.push_back(dataset_for_geometry(cfg, cfg.geometries[g],
                                                static_cast<std::uint32_t>(g)));

    CrossvalReport report;
    report.config = cfg;
    for (std::size_t fold = 0; fold < cfg.geometries.size(); ++fold) {
        FoldResult fr;
        fr.held_out_geometry = static_cast<std::uint32_t>(fold);
        try {
            std::vector<WindowDataset> pool_parts;
            for (std::size_t g = 0; g < datasets.size(); ++g) {
                if (g == fold) continue;
                pool_parts.push_back(datasets[g]);
                fr.train_geometries.push_back(static_cast<std::uint32_t>(g));
            }
            WindowDataset pooled = merge(pool_parts);
            // Leakage audit before any training touches the pool.
            for (const auto& s : pooled.samples)
                if (s.geometry_id == fr.held_out_geometry)
                    throw std::logic_error("crossval: held-out window leaked into the pool");

            TrainOptions opts = cfg.training;
            opts.split_seed = mix_seed(cfg.training.split_seed, fold);
            opts.init_seed = mix_seed(cfg.training.init_seed, fold);
            TrainResult tr = train_fno(cfg.fno, pooled, opts);
            fr.train_window_count = tr.train_indices.size();
            fr.test_window_count = tr.test_indices.size();
            fr.curves = tr.history;

            const std::vector<WindowScore> val_scores =
                evaluate_model(tr.model, datasets[fold]);
            fr.validation_window_count = val_scores.size();
            const AggregateReport agg = aggregate(val_scores, cfg.report.worst_k);
            fr.validation = {agg.mean_mse, agg.mean_nrmse, agg.mean_nl2, agg.mean_r2};
            fr.validation_degenerate = agg.degenerate_count;
            fr.worst_windows = agg.worst;
        } catch (const std::exception& ex) {
            fr.error = ex.what();
            log::warn("fold %zu failed: %s", fold, ex.what());
        }
        report.folds.push_back(std::move(fr));
    }
    return report;
}

namespace {

nlohmann::ordered_json metricset_to_json(const MetricSet& m) {
    return {{"mse", m.mse}, {"nrmse", m.nrmse}, {"nl2", m.nl2}, {"r2", m.r2}};
}

} // namespace

nlohmann::ordered_json crossval_to_json(const CrossvalReport& report) {
    nlohmann::ordered_json j;
    j["schema"] = 1;
    j["config"] = config_to_json(report.config);
    j["folds"] = nlohmann::ordered_json::array();
    for (const auto& fr : report.folds) {
        nlohmann::ordered_json f;
        f["held_out_geometry"] = fr.held_out_geometry;
        f["train_geometries"] = fr.train_geometries;
        f["train_window_count"] = fr.train_window_count;
        f["test_window_count"] = fr.test_window_count;
        f["validation_window_count"] = fr.validation_window_count;
        if (!fr.error.empty()) {
            f["error"] = fr.error;
        } else {
            f["error"] = nullptr;
            f["validation"] = metricset_to_json(fr.validation);
            f["validation_degenerate_windows"] = fr.validation_degenerate;
            nlohmann::ordered_json worst = nlohmann::ordered_json::array();
            for (const auto& w : fr.worst_windows)
                worst.push_back({{"window", w.window_id}, {"r2", w.r2}});
            f["worst_windows"] = worst;
            nlohmann::ordered_json curves;
            for (const char* key : {"train_mse", "test_mse", "train_nl2", "test_nl2",
                                    "train_r2", "test_r2"})
                curves[key] = nlohmann::ordered_json::array();
            for (const auto& em : fr.curves) {
                curves["train_mse"].push_back(em.train.mse);
                curves["test_mse"].push_back(em.test.mse);
                curves["train_nl2"].push_back(em.train.nl2);
                curves["test_nl2"].push_back(em.test.nl2);
                curves["train_r2"].push_back(em.train.r2);
                curves["test_r2"].push_back(em.test.r2);
            }
            f["curves"] = curves;
        }
        j["folds"].push_back(std::move(f));
    }
    return j;
}

void write_curves_csv(const std::vector<EpochMetrics>& history, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open for write: " + path);
    os << "epoch,train_mse,test_mse,train_nl2,test_nl2,train_r2,test_r2\n";
    char buf[256];
    for (std::size_t e = 0; e < history.size(); ++e) {
        const auto& em = history[e];
        std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", e + 1,
                      em.train.mse, em.test.mse, em.train.nl2, em.test.nl2, em.train.r2,
                      em.test.r2);
        os << buf;
    }
}

nlohmann::ordered_json evaluation_report(const std::vector<WindowScore>& scores,
                                         std::size_t worst_k, bool per_window) {
    const AggregateReport agg = aggregate(scores, worst_k);
    nlohmann::ordered_json j;
    j["window_count"] = agg.window_count;
    j["aggregate"] = {{"mse", agg.mean_mse},
                      {"nrmse", agg.mean_nrmse},
                      {"nl2", agg.mean_nl2},
                      {"r2", agg.mean_r2},
                      {"degenerate_windows", agg.degenerate_count}};
    nlohmann::ordered_json worst = nlohmann::ordered_json::array();
    for (const auto& w : agg.worst)
        worst.push_back({{"window", w.window_id}, {"r2", w.r2}});
    j["worst_windows"] = worst;
    if (per_window) {
        nlohmann::ordered_json pw = nlohmann::ordered_json::array();
        for (const auto& s : scores)
            pw.push_back({{"mse", s.mse},
                          {"nrmse", s.nrmse},
                          {"nl2", s.nl2},
                          {"r2", s.r2},
                          {"n_scored", s.n_scored},
                          {"degenerate", s.degenerate_r2}});
        j["per_window"] = pw;
    }
    return j;
}

} // namespace thermoforge
