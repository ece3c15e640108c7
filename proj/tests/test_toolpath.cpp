#include <doctest.h>

#include <cstdio>
#include <stdexcept>
#include <map>
#include <vector>

#include "thermoforge/rng.hpp"
#include "thermoforge/toolpath.hpp"

using namespace thermoforge;

namespace {

BuildDomain domain_from_occupancy(int nx, int ny, int nz_part,
                                  const std::vector<std::uint8_t>& part_bits,
                                  double element_mm, int substrate = 1) {
    VoxelPart p{{nx, ny, nz_part}, part_bits, element_mm};
    return attach_substrate(p, substrate);
}

} // namespace

TEST_CASE("serpentine order on a full 2x2 layer") {
    const BuildDomain d = domain_from_occupancy(2, 2, 1, {1, 1, 1, 1}, 2.0);
    const ActivationSchedule s = plan_zigzag(d, 5.0);
    REQUIRE(s.events.size() == 4);
    CHECK(s.events[0].i == 0);
    CHECK(s.events[0].j == 0);
    CHECK(s.events[1].i == 1);
    CHECK(s.events[1].j == 0);
    CHECK(s.events[2].i == 1);
    CHECK(s.events[2].j == 1);
    CHECK(s.events[3].i == 0);
    CHECK(s.events[3].j == 1);
    for (const auto& e : s.events) CHECK(e.k == 1); // substrate below
}

TEST_CASE("dt comes from element size over tool speed") {
    const BuildDomain d = domain_from_occupancy(2, 2, 1, {1, 1, 1, 1}, 2.0);
    const ActivationSchedule s = plan_zigzag(d, 5.0);
    CHECK(s.dt == 2.0 / 5.0);
    CHECK(s.dt == 0.4);
    CHECK(s.events[1].time_s == s.dt);
    CHECK(s.events[0].time_s == 0.0);
}

TEST_CASE("events are a permutation of the part voxels") {
    Rng rng(99);
    for (int trial = 0; trial < 20; ++trial) {
        const int nx = rng.range(2, 6), ny = rng.range(2, 6), nz = rng.range(1, 4);
        std::vector<std::uint8_t> bits(static_cast<std::size_t>(nx) * ny * nz);
        for (auto& b : bits) b = rng.uniform() < 0.6 ? 1 : 0;
        bits[0] = 1;
        const BuildDomain d = domain_from_occupancy(nx, ny, nz, bits, 1.0);
        const ActivationSchedule s = plan_zigzag(d, 5.0);

        std::map<std::array<int, 3>, int> seen;
        for (const auto& e : s.events) seen[{e.i, e.j, e.k}]++;
        std::size_t part_voxels = 0;
        for (int k = d.substrate_layers; k < d.dims.nz; ++k)
            for (int j = 0; j < d.dims.ny; ++j)
                for (int i = 0; i < d.dims.nx; ++i)
                    if (d.occupied(i, j, k)) {
                        ++part_voxels;
                        CHECK(seen[{i, j, k}] == 1);
                    }
        CHECK(s.events.size() == part_voxels);

        // times strictly increasing, i*dt
        for (std::size_t n = 0; n < s.events.size(); ++n)
            CHECK(s.events[n].time_s == doctest::Approx(n * s.dt));
        // layer monotone
        for (std::size_t n = 1; n < s.events.size(); ++n)
            CHECK(s.events[n].k >= s.events[n - 1].k);
    }
}

TEST_CASE("planner is deterministic") {
    const VoxelPart p = generate_shape(5, ShapeFamily::stacked, {8, 8, 8});
    const BuildDomain d = attach_substrate(p, 2);
    const ActivationSchedule a = plan_zigzag(d, 5.0);
    const ActivationSchedule b = plan_zigzag(d, 5.0);
    CHECK(schedule_hash(a) == schedule_hash(b));
    CHECK(a.events.size() == b.events.size());
}

TEST_CASE("consecutive events in a full rectangular layer are 6-adjacent") {
    std::vector<std::uint8_t> bits(5 * 4 * 2, 1);
    const BuildDomain d = domain_from_occupancy(5, 4, 2, bits, 1.0);
    const ActivationSchedule s = plan_zigzag(d, 5.0);
    for (std::size_t n = 1; n < s.events.size(); ++n) {
        const auto& a = s.events[n - 1];
        const auto& b = s.events[n];
        if (a.k != b.k) continue; // layer change
        const int dist = std::abs(a.i - b.i) + std::abs(a.j - b.j);
        CHECK(dist == 1);
    }
}

TEST_CASE("empty part is rejected") {
    BuildDomain d;
    d.dims = {2, 2, 2};
    d.occupancy.assign(8, 0);
    d.substrate_layers = 1;
    d.element_size_mm = 1.0;
    for (int j = 0; j < 2; ++j)
        for (int i = 0; i < 2; ++i) d.occupancy[d.dims.index(i, j, 0)] = 1;
    CHECK_THROWS_AS(plan_zigzag(d, 5.0), std::invalid_argument);
}

TEST_CASE("schedule stats") {
    std::vector<std::uint8_t> bits(20 * 20 * 1, 1);
    const BuildDomain d = domain_from_occupancy(20, 20, 1, bits, 2.0);
    const ActivationSchedule s = plan_zigzag(d, 5.0);
    const ScheduleStats st = schedule_stats(s);
    CHECK(st.count == 400);
    CHECK(st.duration_s == doctest::Approx(160.0));
    CHECK(st.dt == doctest::Approx(0.4));

    const BuildDomain single = domain_from_occupancy(1, 1, 1, {1}, 2.0);
    const ScheduleStats st1 = schedule_stats(plan_zigzag(single, 5.0));
    CHECK(st1.count == 1);
    CHECK(st1.duration_s == doctest::Approx(0.4));

    CHECK_THROWS_AS(schedule_stats(ActivationSchedule{}), std::invalid_argument);
}

TEST_CASE("toolpath file round trip") {
    const VoxelPart p = generate_shape(2, ShapeFamily::carved, {6, 6, 6});
    const BuildDomain d = attach_substrate(p, 1);
    const ActivationSchedule s = plan_zigzag(d, 5.0);
    const std::string path = "test_toolpath_roundtrip.txt";
    save_toolpath(s, path);
    const ActivationSchedule t = load_toolpath(path);
    CHECK(t.dt == s.dt);
    REQUIRE(t.events.size() == s.events.size());
    for (std::size_t n = 0; n < s.events.size(); ++n) {
        CHECK(t.events[n].i == s.events[n].i);
        CHECK(t.events[n].j == s.events[n].j);
        CHECK(t.events[n].k == s.events[n].k);
        CHECK(t.events[n].time_s == s.events[n].time_s);
    }
    std::remove(path.c_str());
}
