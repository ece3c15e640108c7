#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "thermoforge/grid.hpp"

namespace thermoforge {

enum class ShapeFamily { carved, stacked, holed };

ShapeFamily shape_family_from_string(const std::string& s);
const char* to_string(ShapeFamily f);

// Voxelized part on its own grid, before any substrate is attached.
// element_size_mm defaults from the 40 mm bounding-box normalization.
struct VoxelPart {
    Grid3 dims;
    std::vector<std::uint8_t> occupancy; // x-fastest, 1 = material
    double element_size_mm = 0.0;

    bool occupied(int i, int j, int k) const {
        return dims.contains(i, j, k) && occupancy[dims.index(i, j, k)] != 0;
    }
    std::size_t voxel_count() const;
};

// Part raised onto a fully-occupied substrate slab. Substrate voxels are
// pre-activated at ambient temperature; the Dirichlet boundary is the set of
// bottom faces of the lowest substrate layer, every other exterior face of
// active material sees convection-radiation.
struct BuildDomain {
    Grid3 dims;                           // part dims with nz extended by substrate_layers
    std::vector<std::uint8_t> occupancy;  // substrate slab + shifted part
    int substrate_layers = 0;
    double element_size_mm = 0.0;
    double ambient_T = 25.0;              // °C
    double dirichlet_T = 25.0;            // °C

    bool occupied(int i, int j, int k) const {
        return dims.contains(i, j, k) && occupancy[dims.index(i, j, k)] != 0;
    }
    bool is_substrate(int k) const { return k < substrate_layers; }
    // Dirichlet faces exist only underneath the lowest substrate layer.
    bool has_dirichlet() const { return substrate_layers > 0; }
    std::size_t dirichlet_face_count() const {
        return has_dirichlet() ? static_cast<std::size_t>(dims.nx) * dims.ny : 0;
    }
    std::size_t part_voxel_count() const;
};

// element_size from the 40 mm largest-dimension normalization.
double normalized_element_size_mm(const Grid3& dims);

// Deterministic procedural shapes. dims must be >= 4 on every axis.
VoxelPart generate_shape(std::uint64_t seed, ShapeFamily family, const Grid3& dims);

// Invariant checks: non-empty, single 6-connected component, buildability
// (every voxel at z>0 has an occupied 6-neighbor at the same or lower z).
// Returns an empty string when valid, otherwise a description of the first
// violation. Violations are reported, never repaired.
std::string validate_part(const VoxelPart& part);

BuildDomain attach_substrate(const VoxelPart& part, int layers,
                             double ambient_T = 25.0, double dirichlet_T = 25.0);

// VOXPART1 binary format.
void save_part(const VoxelPart& part, const std::string& path);
VoxelPart load_part(const std::string& path);

} // namespace thermoforge
