#include "thermoforge/toolpath.hpp"

#include <cinttypes>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace thermoforge {

ActivationSchedule plan_zigzag(const BuildDomain& domain, double tool_speed_mm_s) {
    if (tool_speed_mm_s <= 0.0)
        throw std::invalid_argument("plan_zigzag: tool speed must be positive");
    ActivationSchedule s;
    s.tool_speed = tool_speed_mm_s;
    s.dt = domain.element_size_mm / tool_speed_mm_s;

    const Grid3& g = domain.dims;
    std::size_t n = 0;
    for (int k = domain.substrate_layers; k < g.nz; ++k) {
        // Layer parity decides the scan axis: even part layers sweep rows of
        // constant y scanning x, odd layers sweep columns of constant x
        // scanning y. Row direction alternates with the row index.
        const int layer = k - domain.substrate_layers;
        auto visit = [&](int i, int j) {
            if (!domain.occupancy[g.index(i, j, k)]) return; // skipped, no time
            s.events.push_back({i, j, k, static_cast<double>(n) * s.dt});
            ++n;
        };
        if (layer % 2 == 0) {
            for (int j = 0; j < g.ny; ++j) {
                if (j % 2 == 0)
                    for (int i = 0; i < g.nx; ++i) visit(i, j);
                else
                    for (int i = g.nx - 1; i >= 0; --i) visit(i, j);
            }
        } else {
            for (int i = 0; i < g.nx; ++i) {
                if (i % 2 == 0)
                    for (int j = 0; j < g.ny; ++j) visit(i, j);
                else
                    for (int j = g.ny - 1; j >= 0; --j) visit(i, j);
            }
        }
    }
    if (s.events.empty()) throw std::invalid_argument("plan_zigzag: part has no voxels");
    return s;
}

ScheduleStats schedule_stats(const ActivationSchedule& schedule) {
    if (schedule.events.empty())
        throw std::invalid_argument("schedule_stats: empty schedule");
    ScheduleStats st;
    st.count = schedule.events.size();
    st.dt = schedule.dt;
    st.duration_s = static_cast<double>(st.count) * schedule.dt;
    return st;
}

std::uint64_t schedule_hash(const ActivationSchedule& schedule) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto mix = [&h](std::uint64_t v) {
        for (int b = 0; b < 8; ++b) {
            h ^= (v >> (8 * b)) & 0xffu;
            h *= 0x100000001b3ULL;
        }
    };
    mix(static_cast<std::uint64_t>(schedule.events.size()));
    std::uint64_t dt_bits;
    static_assert(sizeof(dt_bits) == sizeof(schedule.dt));
    std::memcpy(&dt_bits, &schedule.dt, 8);
    mix(dt_bits);
    for (const auto& e : schedule.events) {
        mix(static_cast<std::uint64_t>(e.i));
        mix(static_cast<std::uint64_t>(e.j));
        mix(static_cast<std::uint64_t>(e.k));
    }
    return h;
}

void save_toolpath(const ActivationSchedule& schedule, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open for write: " + path);
    char buf[96];
    std::snprintf(buf, sizeof buf, "# zigzag v1 dt=%.17g\n", schedule.dt);
    os << buf;
    for (const auto& e : schedule.events) {
        std::snprintf(buf, sizeof buf, "%.17g %d %d %d\n", e.time_s, e.i, e.j, e.k);
        os << buf;
    }
    if (!os) throw std::runtime_error("write failed: " + path);
}

ActivationSchedule load_toolpath(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open: " + path);
    std::string header;
    std::getline(is, header);
    ActivationSchedule s;
    if (std::sscanf(header.c_str(), "# zigzag v1 dt=%lf", &s.dt) != 1)
        throw std::runtime_error(path + ": bad toolpath header");
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        DepositionEvent e;
        if (std::sscanf(line.c_str(), "%lf %d %d %d", &e.time_s, &e.i, &e.j, &e.k) != 4)
            throw std::runtime_error(path + ": bad toolpath line: " + line);
        s.events.push_back(e);
    }
    if (s.events.empty()) throw std::runtime_error(path + ": no events");
    return s;
}

} // namespace thermoforge
