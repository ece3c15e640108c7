#include "thermoforge/geometry.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>

#include "thermoforge/binio.hpp"
#include "thermoforge/rng.hpp"

namespace thermoforge {

ShapeFamily shape_family_from_string(const std::string& s) {
    if (s == "carved") return ShapeFamily::carved;
    if (s == "stacked") return ShapeFamily::stacked;
    if (s == "holed") return ShapeFamily::holed;
    throw std::invalid_argument("unknown shape family: " + s);
}

const char* to_string(ShapeFamily f) {
    switch (f) {
        case ShapeFamily::carved: return "carved";
        case ShapeFamily::stacked: return "stacked";
        case ShapeFamily::holed: return "holed";
    }
    return "?";
}

std::size_t VoxelPart::voxel_count() const {
    return static_cast<std::size_t>(std::count(occupancy.begin(), occupancy.end(), 1));
}

std::size_t BuildDomain::part_voxel_count() const {
    std::size_t n = 0;
    for (int k = substrate_layers; k < dims.nz; ++k)
        for (int j = 0; j < dims.ny; ++j)
            for (int i = 0; i < dims.nx; ++i)
                if (occupancy[dims.index(i, j, k)]) ++n;
    return n;
}

double normalized_element_size_mm(const Grid3& dims) {
    const int largest = std::max({dims.nx, dims.ny, dims.nz});
    return 40.0 / static_cast<double>(largest);
}

namespace {

void fill_box(VoxelPart& p, int x0, int x1, int y0, int y1, int z0, int z1, std::uint8_t v) {
    for (int k = z0; k < z1; ++k)
        for (int j = y0; j < y1; ++j)
            for (int i = x0; i < x1; ++i)
                p.occupancy[p.dims.index(i, j, k)] = v;
}

// Solid block with a rectangular pocket cut from the top, open to the top
// face. Column occupancy stays bottom-contiguous, so buildability is free.
VoxelPart make_carved(Rng& rng, const Grid3& dims) {
    VoxelPart p{dims, std::vector<std::uint8_t>(dims.count(), 1), 0.0};
    const int nx = dims.nx, ny = dims.ny, nz = dims.nz;
    const int z0 = rng.range(nz / 2, nz - 1);
    // Keep at least a one-cell rim on one side so the carve never removes a
    // whole layer.
    const int cw = rng.range(1, nx - 2);
    const int cd = rng.range(1, ny - 2);
    const int x0 = rng.range(0, nx - cw - 1);
    const int y0 = rng.range(1, ny - cd - 1);
    fill_box(p, x0, x0 + cw, y0, y0 + cd, z0, nz, 0);
    return p;
}

// Two or three stacked tiers with strictly nested footprints.
VoxelPart make_stacked(Rng& rng, const Grid3& dims) {
    VoxelPart p{dims, std::vector<std::uint8_t>(dims.count(), 0), 0.0};
    const int nx = dims.nx, ny = dims.ny, nz = dims.nz;
    const int tiers = rng.range(2, std::min(3, nz / 2));
    int x0 = 0, x1 = nx, y0 = 0, y1 = ny;
    int z = 0;
    for (int t = 0; t < tiers; ++t) {
        const int zh = (t == tiers - 1) ? nz - z
                                        : rng.range(1, nz - z - (tiers - 1 - t));
        fill_box(p, x0, x1, y0, y1, z, z + zh, 1);
        z += zh;
        // Shrink the footprint for the next tier, keeping it non-empty.
        const int sx = rng.range(0, std::max(0, (x1 - x0 - 2) / 2));
        const int sy = rng.range(0, std::max(0, (y1 - y0 - 2) / 2));
        x0 += sx; x1 -= sx;
        y0 += sy; y1 -= sy;
    }
    return p;
}

// Solid block minus an axis-aligned cylindrical through-hole, strictly
// interior in its cross-section.
VoxelPart make_holed(Rng& rng, const Grid3& dims) {
    VoxelPart p{dims, std::vector<std::uint8_t>(dims.count(), 1), 0.0};
    const int axis = rng.range(0, 2); // 0=x, 1=y, 2=z
    const int nu = (axis == 0) ? dims.ny : dims.nx;
    const int nv = (axis == 2) ? dims.ny : dims.nz;
    const double rmax = 0.5 * std::min(nu, nv) - 1.5;
    const double r = rng.uniform(1.0, std::max(1.0, rmax));
    const double cu = 0.5 * nu + rng.uniform(-0.5, 0.5);
    const double cv = 0.5 * nv + rng.uniform(-0.5, 0.5);
    for (int k = 0; k < dims.nz; ++k)
        for (int j = 0; j < dims.ny; ++j)
            for (int i = 0; i < dims.nx; ++i) {
                double u, v;
                if (axis == 0) { u = j + 0.5; v = k + 0.5; }
                else if (axis == 1) { u = i + 0.5; v = k + 0.5; }
                else { u = i + 0.5; v = j + 0.5; }
                const double du = u - cu, dv = v - cv;
                if (du * du + dv * dv <= r * r)
                    p.occupancy[p.dims.index(i, j, k)] = 0;
            }
    return p;
}

} // namespace

VoxelPart generate_shape(std::uint64_t seed, ShapeFamily family, const Grid3& dims) {
    if (dims.nx < 4 || dims.ny < 4 || dims.nz < 4)
        throw std::invalid_argument("generate_shape: dims must be >= 4 per axis");
    Rng rng(mix_seed(seed, static_cast<std::uint64_t>(family)));
    VoxelPart p;
    switch (family) {
        case ShapeFamily::carved: p = make_carved(rng, dims); break;
        case ShapeFamily::stacked: p = make_stacked(rng, dims); break;
        case ShapeFamily::holed: p = make_holed(rng, dims); break;
    }
    p.element_size_mm = normalized_element_size_mm(dims);
    const std::string err = validate_part(p);
    if (!err.empty())
        throw std::logic_error("generate_shape produced an invalid part: " + err);
    return p;
}

std::string validate_part(const VoxelPart& part) {
    const Grid3& g = part.dims;
    if (part.occupancy.size() != g.count()) return "occupancy size mismatch";
    const std::size_t total = part.voxel_count();
    if (total == 0) return "part is empty";

    // Single 6-connected component via flood fill from the first voxel.
    std::vector<std::uint8_t> seen(g.count(), 0);
    std::vector<std::size_t> stack;
    std::size_t first = 0;
    while (!part.occupancy[first]) ++first;
    seen[first] = 1;
    stack.push_back(first);
    std::size_t reached = 0;
    while (!stack.empty()) {
        const std::size_t cur = stack.back();
        stack.pop_back();
        ++reached;
        const auto [i, j, k] = g.coords(cur);
        for (const auto& d : kFaceNeighbors) {
            const int ni = i + d[0], nj = j + d[1], nk = k + d[2];
            if (!g.contains(ni, nj, nk)) continue;
            const std::size_t nidx = g.index(ni, nj, nk);
            if (part.occupancy[nidx] && !seen[nidx]) {
                seen[nidx] = 1;
                stack.push_back(nidx);
            }
        }
    }
    if (reached != total) return "occupancy is not 6-connected";

    // Buildability: support at the same or lower z through a 6-neighbor.
    for (int k = 1; k < g.nz; ++k)
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i) {
                if (!part.occupancy[g.index(i, j, k)]) continue;
                const bool supported = part.occupied(i, j, k - 1) ||
                                       part.occupied(i - 1, j, k) || part.occupied(i + 1, j, k) ||
                                       part.occupied(i, j - 1, k) || part.occupied(i, j + 1, k);
                if (!supported)
                    return "unsupported voxel at (" + std::to_string(i) + "," +
                           std::to_string(j) + "," + std::to_string(k) + ")";
            }
    return {};
}

BuildDomain attach_substrate(const VoxelPart& part, int layers,
                             double ambient_T, double dirichlet_T) {
    if (layers < 1) throw std::invalid_argument("attach_substrate: layers must be >= 1");
    BuildDomain d;
    d.dims = {part.dims.nx, part.dims.ny, part.dims.nz + layers};
    d.occupancy.assign(d.dims.count(), 0);
    d.substrate_layers = layers;
    d.element_size_mm = part.element_size_mm;
    d.ambient_T = ambient_T;
    d.dirichlet_T = dirichlet_T;
    for (int k = 0; k < layers; ++k)
        for (int j = 0; j < d.dims.ny; ++j)
            for (int i = 0; i < d.dims.nx; ++i)
                d.occupancy[d.dims.index(i, j, k)] = 1;
    for (int k = 0; k < part.dims.nz; ++k)
        for (int j = 0; j < part.dims.ny; ++j)
            for (int i = 0; i < part.dims.nx; ++i)
                d.occupancy[d.dims.index(i, j, k + layers)] =
                    part.occupancy[part.dims.index(i, j, k)];
    return d;
}

void save_part(const VoxelPart& part, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open for write: " + path);
    write_magic(os, "VOXPART1");
    write_le<std::uint32_t>(os, static_cast<std::uint32_t>(part.dims.nx));
    write_le<std::uint32_t>(os, static_cast<std::uint32_t>(part.dims.ny));
    write_le<std::uint32_t>(os, static_cast<std::uint32_t>(part.dims.nz));
    write_le<double>(os, part.element_size_mm);
    const auto bits = pack_bits(part.occupancy);
    os.write(reinterpret_cast<const char*>(bits.data()), static_cast<std::streamsize>(bits.size()));
    if (!os) throw std::runtime_error("write failed: " + path);
}

VoxelPart load_part(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open: " + path);
    expect_magic(is, "VOXPART1", path);
    VoxelPart p;
    p.dims.nx = static_cast<int>(read_le<std::uint32_t>(is));
    p.dims.ny = static_cast<int>(read_le<std::uint32_t>(is));
    p.dims.nz = static_cast<int>(read_le<std::uint32_t>(is));
    p.element_size_mm = read_le<double>(is);
    if (p.dims.nx <= 0 || p.dims.ny <= 0 || p.dims.nz <= 0)
        throw std::runtime_error(path + ": bad dimensions");
    const std::size_t nbytes = (p.dims.count() + 7) / 8;
    std::vector<std::uint8_t> bits(nbytes);
    is.read(reinterpret_cast<char*>(bits.data()), static_cast<std::streamsize>(nbytes));
    if (!is) throw std::runtime_error(path + ": truncated occupancy");
    p.occupancy = unpack_bits(bits, p.dims.count());
    return p;
}

} // namespace thermoforge
