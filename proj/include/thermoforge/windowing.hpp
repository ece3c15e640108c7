#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "thermoforge/geometry.hpp"
#include "thermoforge/thermal.hpp"
#include "thermoforge/toolpath.hpp"

namespace thermoforge {

// Diffusion length over one activation interval, mm.
double characteristic_radius(double alpha_p_mm2s, double dt_s);

// Per-element Euclidean distances (mm) from element centers to the nearest
// convection face center and nearest Dirichlet face center, for the given
// activation state. Faces of active elements adjacent to void or to the
// domain exterior are convection faces, except the bottom faces of the lowest
// substrate layer, which are Dirichlet. When a face type does not exist the
// distance is the domain box diagonal.
struct BoundaryFields {
    std::vector<double> d_conv_mm;
    std::vector<double> d_dirichlet_mm;
};

BoundaryFields boundary_impact(const BuildDomain& domain,
                               const std::vector<std::uint8_t>& active);

// Channel order, fixed by schema version 1.
enum Channel : int {
    kTin = 0,
    kRhoAct = 1,
    kPower = 2,
    kDx = 3,
    kDy = 4,
    kDz = 5,
    kDConv = 6,
    kDDirichlet = 7,
    kTout = 8,
    kMask = 9,
    kChannelCount = 10,
};

extern const std::array<const char*, kChannelCount> kChannelNames;

struct WindowSample {
    std::uint32_t geometry_id = 0;
    std::uint32_t event_index = 0;
    std::array<std::uint16_t, 3> anchor{}; // domain element of the anchoring deposit
    std::vector<float> data;               // kChannelCount blocks of edge^3 floats

    std::size_t block(int edge) const { return static_cast<std::size_t>(edge) * edge * edge; }
    const float* channel(Channel c, int edge) const { return data.data() + block(edge) * c; }
    float* channel(Channel c, int edge) { return data.data() + block(edge) * c; }
};

struct DatasetNorm {
    double ambient_T = 25.0;
    double activation_T = 1750.0;
    double dist_scale_mm = 11.0; // window half extent, edge*dx/2
};

struct GeometryProvenance {
    std::uint32_t geometry_id = 0;
    std::uint64_t schedule_hash = 0;
    std::string description;
};

struct WindowDataset {
    int edge = 11;
    std::uint16_t schema_version = 1;
    DatasetNorm norm;
    std::vector<GeometryProvenance> provenance;
    std::vector<WindowSample> samples;
};

struct ExtractOptions {
    int edge = 11;
    int k_recent = 10;
    std::uint32_t geometry_id = 0;
    double activation_T = 1750.0; // recorded as the temperature normalization scale
};

// Cut heat-affected windows: for every event i, one window around each of the
// k_recent most recent deposits, input from snapshot i, target from snapshot
// i+1, out-of-domain voxels padded as void. The mask is the input snapshot's
// activation state.
WindowDataset extract_windows(const TemperatureHistory& history,
                              const ActivationSchedule& schedule,
                              const BuildDomain& domain, const ExtractOptions& opts);

// Seeded subset of n samples (order preserved).
WindowDataset subsample(const WindowDataset& dataset, std::size_t n, std::uint64_t seed);

// Concatenate datasets with identical schema and normalization.
WindowDataset merge(const std::vector<WindowDataset>& parts);

// AMWIN01 binary + <path>.manifest.json sidecar.
void save_dataset(const WindowDataset& dataset, const std::string& path);
WindowDataset load_dataset(const std::string& path);

} // namespace thermoforge
