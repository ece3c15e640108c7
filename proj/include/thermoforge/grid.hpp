#pragma once

#include <array>
#include <cstdint>
#include <cstddef>

namespace thermoforge {

// Uniform voxel grid indexing, x-fastest linear order.
struct Grid3 {
    int nx = 0, ny = 0, nz = 0;

    constexpr std::size_t count() const {
        return static_cast<std::size_t>(nx) * ny * nz;
    }
    constexpr std::size_t index(int i, int j, int k) const {
        return (static_cast<std::size_t>(k) * ny + j) * nx + i;
    }
    constexpr bool contains(int i, int j, int k) const {
        return i >= 0 && i < nx && j >= 0 && j < ny && k >= 0 && k < nz;
    }
    std::array<int, 3> coords(std::size_t linear) const {
        const int i = static_cast<int>(linear % nx);
        const int j = static_cast<int>((linear / nx) % ny);
        const int k = static_cast<int>(linear / (static_cast<std::size_t>(nx) * ny));
        return {i, j, k};
    }
    bool operator==(const Grid3&) const = default;
};

// Offsets of the 6 face neighbors, paired +/- per axis.
inline constexpr std::array<std::array<int, 3>, 6> kFaceNeighbors = {{
    {+1, 0, 0}, {-1, 0, 0},
    {0, +1, 0}, {0, -1, 0},
    {0, 0, +1}, {0, 0, -1},
}};

} // namespace thermoforge
