#include "thermoforge/windowing.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "thermoforge/binio.hpp"
#include "thermoforge/rng.hpp"

namespace thermoforge {

double characteristic_radius(double alpha_p_mm2s, double dt_s) {
    if (alpha_p_mm2s <= 0.0 || dt_s <= 0.0)
        throw std::invalid_argument("characteristic_radius: inputs must be positive");
    return std::sqrt(alpha_p_mm2s * dt_s);
}

namespace {

constexpr double kFar = 1e30;

// 1D lower envelope of parabolas rooted at pos[q] with offsets val[q],
// evaluated at integer query points 0..nq-1. Positions must be increasing.
// Classic two-scan parabola envelope; exact because the final value is
// evaluated directly from the winning parabola.
void envelope_1d(const std::vector<double>& pos, const std::vector<double>& val,
                 int nq, std::vector<double>& out, std::vector<int>& v,
                 std::vector<double>& z) {
    const int n = static_cast<int>(pos.size());
    v.resize(n);
    z.resize(n + 1);
    constexpr double inf = std::numeric_limits<double>::infinity();
    int k = -1;
    for (int q = 0; q < n; ++q) {
        if (val[q] >= kFar) continue;
        if (k < 0) {
            k = 0;
            v[0] = q;
            z[0] = -inf;
            z[1] = inf;
            continue;
        }
        double s;
        for (;;) {
            const int p = v[k];
            s = ((val[q] + pos[q] * pos[q]) - (val[p] + pos[p] * pos[p])) /
                (2.0 * (pos[q] - pos[p]));
            if (s <= z[k]) { --k; continue; } // z[0] = -inf, so k stays >= 0
            break;
        }
        ++k;
        v[k] = q;
        z[k] = s;
        z[k + 1] = inf;
    }
    if (k < 0) {
        std::fill(out.begin(), out.begin() + nq, kFar);
        return;
    }
    int idx = 0;
    for (int a = 0; a < nq; ++a) {
        const double x = static_cast<double>(a);
        while (z[idx + 1] < x) ++idx;
        const double d = x - pos[v[idx]];
        out[a] = val[v[idx]] + d * d;
    }
}

// Squared-distance transform over the element grid for one face family.
// `sites` marks owning elements; `offset` is the face-center offset (in
// element units) along each axis relative to the owning element center.
void family_edt(const Grid3& g, const std::vector<std::uint8_t>& sites,
                const std::array<double, 3>& offset, std::vector<double>& dist2) {
    std::vector<double> cur(g.count());
    for (std::size_t i = 0; i < g.count(); ++i) cur[i] = sites[i] ? 0.0 : kFar;

    std::vector<double> pos, val, out;
    std::vector<int> venv;
    std::vector<double> zenv;

    // x pass
    pos.resize(g.nx);
    val.resize(g.nx);
    out.resize(g.nx);
    for (int i = 0; i < g.nx; ++i) pos[i] = i + offset[0];
    for (int k = 0; k < g.nz; ++k)
        for (int j = 0; j < g.ny; ++j) {
            for (int i = 0; i < g.nx; ++i) val[i] = cur[g.index(i, j, k)];
            envelope_1d(pos, val, g.nx, out, venv, zenv);
            for (int i = 0; i < g.nx; ++i) cur[g.index(i, j, k)] = out[i];
        }
    // y pass
    pos.resize(g.ny);
    val.resize(g.ny);
    out.resize(g.ny);
    for (int j = 0; j < g.ny; ++j) pos[j] = j + offset[1];
    for (int k = 0; k < g.nz; ++k)
        for (int i = 0; i < g.nx; ++i) {
            for (int j = 0; j < g.ny; ++j) val[j] = cur[g.index(i, j, k)];
            envelope_1d(pos, val, g.ny, out, venv, zenv);
            for (int j = 0; j < g.ny; ++j) cur[g.index(i, j, k)] = out[j];
        }
    // z pass
    pos.resize(g.nz);
    val.resize(g.nz);
    out.resize(g.nz);
    for (int k = 0; k < g.nz; ++k) pos[k] = k + offset[2];
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            for (int k = 0; k < g.nz; ++k) val[k] = cur[g.index(i, j, k)];
            envelope_1d(pos, val, g.nz, out, venv, zenv);
            for (int k = 0; k < g.nz; ++k) cur[g.index(i, j, k)] = out[k];
        }

    for (std::size_t i = 0; i < g.count(); ++i) dist2[i] = std::min(dist2[i], cur[i]);
}

} // namespace

BoundaryFields boundary_impact(const BuildDomain& domain,
                               const std::vector<std::uint8_t>& active) {
    const Grid3& g = domain.dims;
    if (active.size() != g.count())
        throw std::invalid_argument("boundary_impact: active size mismatch");
    const double dx = domain.element_size_mm;
    const double diag = dx * std::sqrt(static_cast<double>(g.nx) * g.nx +
                                       static_cast<double>(g.ny) * g.ny +
                                       static_cast<double>(g.nz) * g.nz);

    BoundaryFields out;
    out.d_conv_mm.assign(g.count(), diag);
    out.d_dirichlet_mm.assign(g.count(), diag);

    // Dirichlet faces tile the entire bottom when a substrate exists, so the
    // nearest one sits directly below: distance (k + 1/2) * dx.
    if (domain.has_dirichlet()) {
        for (int k = 0; k < g.nz; ++k) {
            const double d = (k + 0.5) * dx;
            for (int j = 0; j < g.ny; ++j)
                for (int i = 0; i < g.nx; ++i)
                    out.d_dirichlet_mm[g.index(i, j, k)] = d;
        }
    }

    // Convection faces: one EDT per face family, sites marked on the owning
    // element, face offset folded into the parabola roots.
    std::vector<double> dist2(g.count(), kFar);
    std::vector<std::uint8_t> sites(g.count());
    bool any_face = false;
    for (int f = 0; f < 6; ++f) {
        std::fill(sites.begin(), sites.end(), 0);
        bool family_any = false;
        for (int k = 0; k < g.nz; ++k)
            for (int j = 0; j < g.ny; ++j)
                for (int i = 0; i < g.nx; ++i) {
                    if (!active[g.index(i, j, k)]) continue;
                    const int ni = i + kFaceNeighbors[f][0];
                    const int nj = j + kFaceNeighbors[f][1];
                    const int nk = k + kFaceNeighbors[f][2];
                    const bool exposed =
                        !(g.contains(ni, nj, nk) && active[g.index(ni, nj, nk)]);
                    if (!exposed) continue;
                    if (nk < 0 && domain.has_dirichlet()) continue; // Dirichlet, not convection
                    sites[g.index(i, j, k)] = 1;
                    family_any = true;
                }
        if (!family_any) continue;
        any_face = true;
        const std::array<double, 3> offset = {0.5 * kFaceNeighbors[f][0],
                                              0.5 * kFaceNeighbors[f][1],
                                              0.5 * kFaceNeighbors[f][2]};
        family_edt(g, sites, offset, dist2);
    }
    if (any_face)
        for (std::size_t i = 0; i < g.count(); ++i)
            if (dist2[i] < kFar) out.d_conv_mm[i] = std::sqrt(dist2[i]) * dx;
    return out;
}

const std::array<const char*, kChannelCount> kChannelNames = {
    "T_in", "rho_act", "power", "dx", "dy", "dz",
    "d_conv", "d_dirichlet", "T_out", "mask",
};

WindowDataset extract_windows(const TemperatureHistory& history,
                              const ActivationSchedule& schedule,
                              const BuildDomain& domain, const ExtractOptions& opts) {
    if (opts.edge < 1 || opts.edge % 2 == 0)
        throw std::invalid_argument("extract_windows: edge must be odd and positive");
    if (opts.k_recent < 1)
        throw std::invalid_argument("extract_windows: k_recent must be >= 1");
    const std::size_t n_events = schedule.events.size();
    if (history.snapshots.size() != n_events + 1)
        throw std::invalid_argument("extract_windows: history/schedule mismatch");
    if (history.dims != domain.dims)
        throw std::invalid_argument("extract_windows: history dims mismatch");

    const Grid3& g = domain.dims;
    const int edge = opts.edge;
    const int half = edge / 2;
    const int dclamp = edge - 1;
    const std::size_t block = static_cast<std::size_t>(edge) * edge * edge;
    const float ambient = static_cast<float>(domain.ambient_T);

    WindowDataset ds;
    ds.edge = edge;
    ds.norm.ambient_T = domain.ambient_T;
    ds.norm.activation_T = opts.activation_T;
    ds.norm.dist_scale_mm = 0.5 * edge * domain.element_size_mm;
    ds.provenance.push_back({opts.geometry_id, schedule_hash(schedule), ""});

    for (std::size_t i = 0; i < n_events; ++i) {
        const Snapshot& input = history.snapshots[i];
        const Snapshot& target = history.snapshots[i + 1];
        const BoundaryFields bf = boundary_impact(domain, input.active);
        const DepositionEvent& deposit = schedule.events[i];

        const std::size_t j_lo = (i + 1 >= static_cast<std::size_t>(opts.k_recent))
                                     ? i + 1 - opts.k_recent
                                     : 0;
        for (std::size_t j = j_lo; j <= i; ++j) {
            const DepositionEvent& anchor = schedule.events[j];
            WindowSample s;
            s.geometry_id = opts.geometry_id;
            s.event_index = static_cast<std::uint32_t>(i);
            s.anchor = {static_cast<std::uint16_t>(anchor.i),
                        static_cast<std::uint16_t>(anchor.j),
                        static_cast<std::uint16_t>(anchor.k)};
            s.data.assign(block * kChannelCount, 0.0f);
            float* tin = s.channel(kTin, edge);
            float* rho = s.channel(kRhoAct, edge);
            float* pow_ = s.channel(kPower, edge);
            float* ddx = s.channel(kDx, edge);
            float* ddy = s.channel(kDy, edge);
            float* ddz = s.channel(kDz, edge);
            float* dcv = s.channel(kDConv, edge);
            float* ddr = s.channel(kDDirichlet, edge);
            float* tout = s.channel(kTout, edge);
            float* msk = s.channel(kMask, edge);

            std::size_t w = 0;
            for (int wz = 0; wz < edge; ++wz)
                for (int wy = 0; wy < edge; ++wy)
                    for (int wx = 0; wx < edge; ++wx, ++w) {
                        const int gi = anchor.i - half + wx;
                        const int gj = anchor.j - half + wy;
                        const int gk = anchor.k - half + wz;
                        pow_[w] = 1.0f;
                        const auto clampd = [dclamp](int d) {
                            return static_cast<float>(std::clamp(d, -dclamp, dclamp));
                        };
                        ddx[w] = clampd(deposit.i - gi);
                        ddy[w] = clampd(deposit.j - gj);
                        ddz[w] = clampd(deposit.k - gk);
                        if (g.contains(gi, gj, gk)) {
                            const std::size_t idx = g.index(gi, gj, gk);
                            if (input.active[idx]) {
                                tin[w] = input.T[idx];
                                tout[w] = target.T[idx];
                                rho[w] = 1.0f;
                                msk[w] = 1.0f;
                                dcv[w] = static_cast<float>(bf.d_conv_mm[idx]);
                                ddr[w] = static_cast<float>(bf.d_dirichlet_mm[idx]);
                                continue;
                            }
                        }
                        tin[w] = ambient;
                        tout[w] = ambient;
                    }
            ds.samples.push_back(std::move(s));
        }
    }
    return ds;
}

WindowDataset subsample(const WindowDataset& dataset, std::size_t n, std::uint64_t seed) {
    if (n >= dataset.samples.size()) return dataset;
    std::vector<std::size_t> order(dataset.samples.size());
    std::iota(order.begin(), order.end(), 0);
    Rng rng(mix_seed(seed, 0x5a5aULL));
    rng.shuffle(order);
    order.resize(n);
    std::sort(order.begin(), order.end());
    WindowDataset out = dataset;
    out.samples.clear();
    out.samples.reserve(n);
    for (std::size_t idx : order) out.samples.push_back(dataset.samples[idx]);
    return out;
}

WindowDataset merge(const std::vector<WindowDataset>& parts) {
    if (parts.empty()) throw std::invalid_argument("merge: no datasets");
    WindowDataset out = parts.front();
    for (std::size_t p = 1; p < parts.size(); ++p) {
        const auto& d = parts[p];
        if (d.edge != out.edge || d.schema_version != out.schema_version)
            throw std::invalid_argument("merge: schema mismatch");
        if (d.norm.ambient_T != out.norm.ambient_T ||
            d.norm.activation_T != out.norm.activation_T ||
            d.norm.dist_scale_mm != out.norm.dist_scale_mm)
            throw std::invalid_argument("merge: normalization mismatch");
        out.provenance.insert(out.provenance.end(), d.provenance.begin(), d.provenance.end());
        out.samples.insert(out.samples.end(), d.samples.begin(), d.samples.end());
    }
    return out;
}

void save_dataset(const WindowDataset& dataset, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open for write: " + path);
    write_magic(os, "AMWIN01\0");
    write_le<std::uint16_t>(os, dataset.schema_version);
    write_le<std::uint16_t>(os, static_cast<std::uint16_t>(dataset.edge));
    write_le<std::uint16_t>(os, static_cast<std::uint16_t>(kChannelCount));
    write_le<std::uint32_t>(os, static_cast<std::uint32_t>(dataset.samples.size()));
    const std::size_t block = static_cast<std::size_t>(dataset.edge) * dataset.edge * dataset.edge;
    for (const auto& s : dataset.samples) {
        write_le<std::uint32_t>(os, s.geometry_id);
        write_le<std::uint32_t>(os, s.event_index);
        for (int a = 0; a < 3; ++a) write_le<std::uint16_t>(os, s.anchor[a]);
        if (s.data.size() != block * kChannelCount)
            throw std::logic_error("save_dataset: sample block size mismatch");
        for (float v : s.data) write_le<float>(os, v);
    }
    if (!os) throw std::runtime_error("write failed: " + path);

    nlohmann::ordered_json manifest;
    manifest["schema_version"] = dataset.schema_version;
    manifest["window_edge"] = dataset.edge;
    manifest["channels"] = kChannelNames;
    manifest["normalization"] = {{"ambient_T_C", dataset.norm.ambient_T},
                                 {"activation_T_C", dataset.norm.activation_T},
                                 {"dist_scale_mm", dataset.norm.dist_scale_mm}};
    nlohmann::ordered_json prov = nlohmann::ordered_json::array();
    for (const auto& p : dataset.provenance)
        prov.push_back({{"geometry_id", p.geometry_id},
                        {"schedule_hash", p.schedule_hash},
                        {"description", p.description}});
    manifest["provenance"] = prov;
    manifest["sample_count"] = dataset.samples.size();
    std::ofstream ms(path + ".manifest.json");
    if (!ms) throw std::runtime_error("cannot open for write: " + path + ".manifest.json");
    ms << manifest.dump(2) << "\n";
}

WindowDataset load_dataset(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open: " + path);
    expect_magic(is, "AMWIN01\0", path);
    WindowDataset ds;
    ds.schema_version = read_le<std::uint16_t>(is);
    if (ds.schema_version != 1)
        throw std::runtime_error(path + ": unsupported schema version");
    ds.edge = read_le<std::uint16_t>(is);
    const auto nch = read_le<std::uint16_t>(is);
    if (nch != kChannelCount)
        throw std::runtime_error(path + ": unexpected channel count");
    const auto nsamples = read_le<std::uint32_t>(is);
    const std::size_t block = static_cast<std::size_t>(ds.edge) * ds.edge * ds.edge;
    ds.samples.resize(nsamples);
    for (auto& s : ds.samples) {
        s.geometry_id = read_le<std::uint32_t>(is);
        s.event_index = read_le<std::uint32_t>(is);
        for (int a = 0; a < 3; ++a) s.anchor[a] = read_le<std::uint16_t>(is);
        s.data.resize(block * kChannelCount);
        for (auto& v : s.data) v = read_le<float>(is);
    }

    std::ifstream ms(path + ".manifest.json");
    if (!ms) throw std::runtime_error("missing manifest sidecar: " + path + ".manifest.json");
    nlohmann::json manifest = nlohmann::json::parse(ms);
    ds.norm.ambient_T = manifest.at("normalization").at("ambient_T_C").get<double>();
    ds.norm.activation_T = manifest.at("normalization").at("activation_T_C").get<double>();
    ds.norm.dist_scale_mm = manifest.at("normalization").at("dist_scale_mm").get<double>();
    for (const auto& p : manifest.at("provenance"))
        ds.provenance.push_back({p.at("geometry_id").get<std::uint32_t>(),
                                 p.at("schedule_hash").get<std::uint64_t>(),
                                 p.at("description").get<std::string>()});
    return ds;
}

} // namespace thermoforge
