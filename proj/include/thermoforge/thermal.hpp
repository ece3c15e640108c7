#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "thermoforge/geometry.hpp"
#include "thermoforge/material.hpp"
#include "thermoforge/toolpath.hpp"

namespace thermoforge {

// Mutable solver state over a build domain. Inactive elements hold the
// ambient placeholder temperature and never exchange heat.
struct ThermalState {
    Grid3 dims;
    std::vector<double> T;               // °C, x-fastest
    std::vector<std::uint8_t> active;
    std::vector<std::uint8_t> solidified; // monotone, implies active
    double time = 0.0;                    // s
};

struct StepDiagnostics {
    double boundary_heat_J = 0.0; // net heat into the domain through all boundaries
    int substeps = 0;
};

// Substrate pre-activated (and solidified) at ambient; part cells inactive.
ThermalState init_state(const BuildDomain& domain, const MaterialModel& model);

// Deposit one element: active, T = activation_T, enhanced heat capacity until
// it first cools below solidus_T. Activating an active element is an error.
void activate(ThermalState& state, const BuildDomain& domain, int i, int j, int k,
              const MaterialModel& model);

// Advance dt_macro with explicit finite-volume sub-steps, each bounded by
// stable_dt (or by substep_cap when positive and smaller). Throws on
// non-finite temperatures with step diagnostics in the message.
StepDiagnostics step(ThermalState& state, const BuildDomain& domain,
                     const MaterialModel& model, double dt_macro,
                     double substep_cap = 0.0);

// One snapshot immediately before each activation event plus one final.
struct Snapshot {
    double time = 0.0;
    std::vector<float> T;
    std::vector<std::uint8_t> active;
};

struct TemperatureHistory {
    Grid3 dims;
    std::vector<Snapshot> snapshots; // events + 1
    double dt = 0.0;
};

TemperatureHistory simulate(const BuildDomain& domain, const ActivationSchedule& schedule,
                            const MaterialModel& model);

// THIST01 binary format.
void save_history(const TemperatureHistory& history, const std::string& path);
TemperatureHistory load_history(const std::string& path, const Grid3& dims);

// Total enthalpy sum(rho(T) * c_p_eff * V * T) over active elements, joules.
// Meaningful as a conserved quantity only for constant properties.
double total_enthalpy(const ThermalState& state, const BuildDomain& domain,
                      const MaterialModel& model);

} // namespace thermoforge
