#pragma once

#include <string>
#include <utility>
#include <vector>

namespace thermoforge {

// Piecewise-linear property of temperature, clamped outside the breakpoint
// range. A single breakpoint is a constant.
class PropertyTable {
public:
    PropertyTable() = default;
    explicit PropertyTable(double constant) : points_{{0.0, constant}} {}
    explicit PropertyTable(std::vector<std::pair<double, double>> points);

    double operator()(double T) const;
    bool is_constant() const { return points_.size() == 1; }
    const std::vector<std::pair<double, double>>& points() const { return points_; }

private:
    std::vector<std::pair<double, double>> points_;
};

// S355-like defaults; every value is overridable through the run config.
struct MaterialModel {
    PropertyTable density{7850.0};        // kg/m^3
    PropertyTable specific_heat{600.0};   // J/(kg K)
    PropertyTable conductivity{45.0};     // W/(m K)
    double enhanced_specific_heat = 4537.9; // J/(kg K), held until solidification
    double activation_T = 1750.0;         // °C
    double solidus_T = 1450.0;            // °C
    double emissivity = 0.35;
    double h_inf = 15.0;                  // W/(m^2 K)
    double stefan_boltzmann = 5.670374419e-8; // W/(m^2 K^4)

    void validate(double ambient_T) const;
};

// Combined convection-radiation coefficient, W/(m^2 K). The radiation
// polynomial is evaluated in kelvin.
double h_c(double T_celsius, const MaterialModel& model, double ambient_celsius);

// Explicit-scheme step bound: safety * rho*c_p*dx^2 / (6*k_p), minimized over
// [ambient, activation_T]. safety = 0.5.
double stable_dt(const MaterialModel& model, double element_size_mm,
                 double ambient_T = 25.0);

// k_p / (rho * c_p) in mm^2/s at the given temperature.
double thermal_diffusivity_mm2s(const MaterialModel& model, double T_celsius);

} // namespace thermoforge
