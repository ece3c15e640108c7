#include "thermoforge/thermal.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "thermoforge/binio.hpp"

namespace thermoforge {

ThermalState init_state(const BuildDomain& domain, const MaterialModel& model) {
    model.validate(domain.ambient_T);
    ThermalState s;
    s.dims = domain.dims;
    s.T.assign(domain.dims.count(), domain.ambient_T);
    s.active.assign(domain.dims.count(), 0);
    s.solidified.assign(domain.dims.count(), 0);
    for (int k = 0; k < domain.substrate_layers; ++k)
        for (int j = 0; j < domain.dims.ny; ++j)
            for (int i = 0; i < domain.dims.nx; ++i) {
                const std::size_t idx = domain.dims.index(i, j, k);
                s.active[idx] = 1;
                s.solidified[idx] = 1; // substrate starts as cold solid metal
            }
    return s;
}

void activate(ThermalState& state, const BuildDomain& domain, int i, int j, int k,
              const MaterialModel& model) {
    if (!domain.occupied(i, j, k))
        throw std::invalid_argument("activate: element is not part of the domain");
    const std::size_t idx = state.dims.index(i, j, k);
    if (state.active[idx])
        throw std::invalid_argument("activate: element already active");
    state.active[idx] = 1;
    state.solidified[idx] = 0;
    state.T[idx] = model.activation_T;
}

namespace {

enum FaceKind : std::uint8_t { kNone = 0, kConduction, kConvection, kDirichlet };

struct CellFaces {
    std::uint32_t idx;
    std::uint32_t nbr[6];
    std::uint8_t kind[6];
};

// Face table for the current active set; rebuilt per macro step (the active
// set only changes between steps).
std::vector<CellFaces> build_faces(const ThermalState& state, const BuildDomain& domain) {
    std::vector<CellFaces> cells;
    const Grid3& g = state.dims;
    for (int k = 0; k < g.nz; ++k)
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i) {
                const std::size_t idx = g.index(i, j, k);
                if (!state.active[idx]) continue;
                CellFaces c{};
                c.idx = static_cast<std::uint32_t>(idx);
                for (int f = 0; f < 6; ++f) {
                    const int ni = i + kFaceNeighbors[f][0];
                    const int nj = j + kFaceNeighbors[f][1];
                    const int nk = k + kFaceNeighbors[f][2];
                    if (g.contains(ni, nj, nk) && state.active[g.index(ni, nj, nk)]) {
                        c.kind[f] = kConduction;
                        c.nbr[f] = static_cast<std::uint32_t>(g.index(ni, nj, nk));
                    } else if (nk < 0 && domain.has_dirichlet()) {
                        c.kind[f] = kDirichlet;
                    } else {
                        c.kind[f] = kConvection;
                    }
                }
                cells.push_back(c);
            }
    return cells;
}

} // namespace

StepDiagnostics step(ThermalState& state, const BuildDomain& domain,
                     const MaterialModel& model, double dt_macro, double substep_cap) {
    if (dt_macro <= 0.0) throw std::invalid_argument("step: dt_macro must be positive");

    double cap = stable_dt(model, domain.element_size_mm, domain.ambient_T);
    if (substep_cap > 0.0) cap = std::min(cap, substep_cap);
    const int nsub = std::max(1, static_cast<int>(std::ceil(dt_macro / cap)));
    const double dt = dt_macro / nsub;

    const double dx = domain.element_size_mm * 1e-3; // m
    const double area = dx * dx;
    const double volume = area * dx;

    const auto cells = build_faces(state, domain);
    std::vector<double> T_new = state.T;

    StepDiagnostics diag;
    diag.substeps = nsub;

    for (int s = 0; s < nsub; ++s) {
        const std::vector<double>& T = state.T;
        for (const CellFaces& c : cells) {
            const double Tc = T[c.idx];
            const double k_self = model.conductivity(Tc);
            double flux = 0.0; // W into the cell
            double boundary = 0.0;
            for (int f = 0; f < 6; ++f) {
                switch (c.kind[f]) {
                    case kConduction: {
                        const double Tn = T[c.nbr[f]];
                        const double k_nbr = model.conductivity(Tn);
                        const double k_face = 2.0 * k_self * k_nbr / (k_self + k_nbr);
                        flux += k_face * area * (Tn - Tc) / dx;
                        break;
                    }
                    case kConvection: {
                        const double q = -h_c(Tc, model, domain.ambient_T) * area *
                                         (Tc - domain.ambient_T);
                        flux += q;
                        boundary += q;
                        break;
                    }
                    case kDirichlet: {
                        // Ghost value T_D half a cell below the face.
                        const double q = k_self * area * (domain.dirichlet_T - Tc) / (0.5 * dx);
                        flux += q;
                        boundary += q;
                        break;
                    }
                    default: break;
                }
            }
            const double cp = state.solidified[c.idx] ? model.specific_heat(Tc)
                                                      : model.enhanced_specific_heat;
            T_new[c.idx] = Tc + dt * flux / (model.density(Tc) * cp * volume);
            diag.boundary_heat_J += boundary * dt;
        }
        for (const CellFaces& c : cells) {
            const double t = T_new[c.idx];
            if (!std::isfinite(t)) {
                const auto [i, j, k] = state.dims.coords(c.idx);
                throw std::runtime_error(
                    "step: non-finite temperature at element (" + std::to_string(i) + "," +
                    std::to_string(j) + "," + std::to_string(k) + "), substep " +
                    std::to_string(s) + "/" + std::to_string(nsub) + ", time " +
                    std::to_string(state.time));
            }
            state.T[c.idx] = t;
            if (!state.solidified[c.idx] && t < model.solidus_T)
                state.solidified[c.idx] = 1;
        }
        state.time += dt;
    }
    return diag;
}

namespace {

Snapshot take_snapshot(const ThermalState& state) {
    Snapshot snap;
    snap.time = state.time;
    snap.T.resize(state.T.size());
    for (std::size_t i = 0; i < state.T.size(); ++i)
        snap.T[i] = static_cast<float>(state.T[i]);
    snap.active = state.active;
    return snap;
}

} // namespace

TemperatureHistory simulate(const BuildDomain& domain, const ActivationSchedule& schedule,
                            const MaterialModel& model) {
    if (schedule.events.empty()) throw std::invalid_argument("simulate: empty schedule");
    for (const auto& e : schedule.events)
        if (!domain.occupied(e.i, e.j, e.k) || e.k < domain.substrate_layers)
            throw std::invalid_argument("simulate: schedule event outside the part");

    ThermalState state = init_state(domain, model);
    TemperatureHistory hist;
    hist.dims = domain.dims;
    hist.dt = schedule.dt;
    hist.snapshots.reserve(schedule.events.size() + 1);

    for (const auto& e : schedule.events) {
        hist.snapshots.push_back(take_snapshot(state));
        activate(state, domain, e.i, e.j, e.k, model);
        step(state, domain, model, schedule.dt);
    }
    hist.snapshots.push_back(take_snapshot(state));
    return hist;
}

void save_history(const TemperatureHistory& history, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open for write: " + path);
    write_magic(os, "THIST01\0");
    write_le<std::uint32_t>(os, static_cast<std::uint32_t>(history.dims.count()));
    write_le<std::uint32_t>(os, static_cast<std::uint32_t>(history.snapshots.size()));
    for (const auto& snap : history.snapshots) {
        write_le<double>(os, snap.time);
        for (float t : snap.T) write_le<float>(os, t);
        const auto bits = pack_bits(snap.active);
        os.write(reinterpret_cast<const char*>(bits.data()),
                 static_cast<std::streamsize>(bits.size()));
    }
    if (!os) throw std::runtime_error("write failed: " + path);
}

TemperatureHistory load_history(const std::string& path, const Grid3& dims) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open: " + path);
    expect_magic(is, "THIST01\0", path);
    const auto count = read_le<std::uint32_t>(is);
    const auto nsnaps = read_le<std::uint32_t>(is);
    if (count != dims.count())
        throw std::runtime_error(path + ": element count does not match domain dims");
    TemperatureHistory hist;
    hist.dims = dims;
    hist.snapshots.resize(nsnaps);
    const std::size_t nbytes = (count + 7) / 8;
    std::vector<std::uint8_t> bits(nbytes);
    for (auto& snap : hist.snapshots) {
        snap.time = read_le<double>(is);
        snap.T.resize(count);
        for (auto& t : snap.T) t = read_le<float>(is);
        is.read(reinterpret_cast<char*>(bits.data()), static_cast<std::streamsize>(nbytes));
        if (!is) throw std::runtime_error(path + ": truncated snapshot");
        snap.active = unpack_bits(bits, count);
    }
    if (hist.snapshots.size() >= 2)
        hist.dt = hist.snapshots[1].time - hist.snapshots[0].time;
    return hist;
}

double total_enthalpy(const ThermalState& state, const BuildDomain& domain,
                      const MaterialModel& model) {
    const double dx = domain.element_size_mm * 1e-3;
    const double volume = dx * dx * dx;
    double sum = 0.0;
    for (std::size_t idx = 0; idx < state.T.size(); ++idx) {
        if (!state.active[idx]) continue;
        const double Tc = state.T[idx];
        const double cp = state.solidified[idx] ? model.specific_heat(Tc)
                                                : model.enhanced_specific_heat;
        sum += model.density(Tc) * cp * volume * Tc;
    }
    return sum;
}

} // namespace thermoforge
