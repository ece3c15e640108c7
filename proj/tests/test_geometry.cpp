#include <doctest.h>

#include <cstdio>
#include <stdexcept>
#include <set>
#include <vector>

#include "thermoforge/geometry.hpp"

using namespace thermoforge;

namespace {

// Independent flood-fill oracle (BFS, queue-based, distinct from the
// implementation's stack walk).
std::size_t flood_reach(const VoxelPart& p) {
    const Grid3& g = p.dims;
    std::vector<std::uint8_t> seen(g.count(), 0);
    std::vector<std::size_t> queue;
    for (std::size_t i = 0; i < g.count(); ++i)
        if (p.occupancy[i]) {
            queue.push_back(i);
            seen[i] = 1;
            break;
        }
    std::size_t reached = 0;
    for (std::size_t head = 0; head < queue.size(); ++head) {
        ++reached;
        const auto [i, j, k] = g.coords(queue[head]);
        const int di[6] = {1, -1, 0, 0, 0, 0};
        const int dj[6] = {0, 0, 1, -1, 0, 0};
        const int dk[6] = {0, 0, 0, 0, 1, -1};
        for (int f = 0; f < 6; ++f) {
            const int ni = i + di[f], nj = j + dj[f], nk = k + dk[f];
            if (!g.contains(ni, nj, nk)) continue;
            const std::size_t idx = g.index(ni, nj, nk);
            if (p.occupancy[idx] && !seen[idx]) {
                seen[idx] = 1;
                queue.push_back(idx);
            }
        }
    }
    return reached;
}

} // namespace

TEST_CASE("carved family removes a pocket from the upper region") {
    const VoxelPart p = generate_shape(7, ShapeFamily::carved, {20, 20, 20});
    CHECK(p.voxel_count() < 8000);
    CHECK(p.voxel_count() > 4000);
    // Removed voxels all sit in the upper half.
    for (int k = 0; k < 20; ++k)
        for (int j = 0; j < 20; ++j)
            for (int i = 0; i < 20; ++i)
                if (!p.occupied(i, j, k)) CHECK(k >= 10);
    CHECK(p.element_size_mm == doctest::Approx(2.0));
}

TEST_CASE("generate_shape is deterministic") {
    const VoxelPart a = generate_shape(7, ShapeFamily::carved, {20, 20, 20});
    const VoxelPart b = generate_shape(7, ShapeFamily::carved, {20, 20, 20});
    CHECK(a.occupancy == b.occupancy);
    const VoxelPart c = generate_shape(8, ShapeFamily::carved, {20, 20, 20});
    CHECK(a.occupancy != c.occupancy);
}

TEST_CASE("holed family stays 6-connected (flood fill oracle)") {
    const VoxelPart p = generate_shape(3, ShapeFamily::holed, {12, 12, 12});
    CHECK(p.voxel_count() < 12 * 12 * 12);
    CHECK(flood_reach(p) == p.voxel_count());
}

TEST_CASE("all families validate across seeds") {
    for (const auto family : {ShapeFamily::carved, ShapeFamily::stacked, ShapeFamily::holed})
        for (std::uint64_t seed = 0; seed < 25; ++seed) {
            const VoxelPart p = generate_shape(seed, family, {10, 12, 9});
            CHECK(validate_part(p).empty());
            CHECK(flood_reach(p) == p.voxel_count());
        }
}

TEST_CASE("small dims are rejected") {
    CHECK_THROWS_AS(generate_shape(1, ShapeFamily::carved, {3, 8, 8}), std::invalid_argument);
    CHECK_THROWS_AS(generate_shape(1, ShapeFamily::holed, {8, 8, 3}), std::invalid_argument);
}

TEST_CASE("validation reports floating material instead of fixing it") {
    VoxelPart p{{4, 4, 4}, std::vector<std::uint8_t>(64, 0), 10.0};
    p.occupancy[p.dims.index(0, 0, 0)] = 1;
    p.occupancy[p.dims.index(0, 0, 2)] = 1; // floats above a gap
    const std::string err = validate_part(p);
    CHECK(!err.empty());
}

TEST_CASE("validation rejects disconnected components") {
    VoxelPart p{{4, 4, 1}, std::vector<std::uint8_t>(16, 0), 10.0};
    p.occupancy[p.dims.index(0, 0, 0)] = 1;
    p.occupancy[p.dims.index(3, 3, 0)] = 1;
    CHECK(validate_part(p) == "occupancy is not 6-connected");
}

TEST_CASE("lateral support at the same z satisfies buildability") {
    VoxelPart p{{3, 1, 2}, std::vector<std::uint8_t>(6, 0), 10.0};
    p.occupancy[p.dims.index(0, 0, 0)] = 1;
    p.occupancy[p.dims.index(0, 0, 1)] = 1;
    p.occupancy[p.dims.index(1, 0, 1)] = 1; // held by its sideways neighbor
    CHECK(validate_part(p).empty());
}

TEST_CASE("attach_substrate extends dims and pre-fills the slab") {
    const VoxelPart p = generate_shape(7, ShapeFamily::carved, {20, 20, 20});
    const BuildDomain d = attach_substrate(p, 2);
    CHECK(d.dims.nx == 20);
    CHECK(d.dims.ny == 20);
    CHECK(d.dims.nz == 22);
    for (int k = 0; k < 2; ++k)
        for (int j = 0; j < 20; ++j)
            for (int i = 0; i < 20; ++i) CHECK(d.occupied(i, j, k));
    // Part occupancy preserved bit-for-bit above the slab.
    for (int k = 0; k < 20; ++k)
        for (int j = 0; j < 20; ++j)
            for (int i = 0; i < 20; ++i)
                CHECK(d.occupied(i, j, k + 2) == p.occupied(i, j, k));
    CHECK(d.dirichlet_face_count() == 400);
}

TEST_CASE("single voxel part on a one-layer substrate") {
    VoxelPart p{{1, 1, 1}, {1}, 2.0};
    const BuildDomain d = attach_substrate(p, 1);
    CHECK(d.dims.nz == 2);
    CHECK(d.occupied(0, 0, 0));
    CHECK(d.occupied(0, 0, 1));
    CHECK(d.dirichlet_face_count() == 1);
    CHECK(d.has_dirichlet());
}

TEST_CASE("attach_substrate requires at least one layer") {
    VoxelPart p{{1, 1, 1}, {1}, 2.0};
    CHECK_THROWS_AS(attach_substrate(p, 0), std::invalid_argument);
}

TEST_CASE("part file round trip is bit exact") {
    const VoxelPart p = generate_shape(11, ShapeFamily::stacked, {9, 7, 11});
    const std::string path = "test_part_roundtrip.vox";
    save_part(p, path);
    const VoxelPart q = load_part(path);
    CHECK(q.dims == p.dims);
    CHECK(q.occupancy == p.occupancy);
    CHECK(q.element_size_mm == p.element_size_mm);
    std::remove(path.c_str());
}

TEST_CASE("part loader rejects a bad magic") {
    const std::string path = "test_part_badmagic.vox";
    {
        std::FILE* f = std::fopen(path.c_str(), "wb");
        std::fwrite("NOTAPART", 1, 8, f);
        std::fclose(f);
    }
    CHECK_THROWS(load_part(path));
    std::remove(path.c_str());
}

TEST_CASE("normalization pins the largest dimension to 40 mm") {
    CHECK(normalized_element_size_mm({20, 20, 20}) == doctest::Approx(2.0));
    CHECK(normalized_element_size_mm({10, 20, 40}) == doctest::Approx(1.0));
    CHECK(normalized_element_size_mm({12, 12, 12}) == doctest::Approx(40.0 / 12.0));
}
