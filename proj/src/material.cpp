#include "thermoforge/material.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace thermoforge {

PropertyTable::PropertyTable(std::vector<std::pair<double, double>> points)
    : points_(std::move(points)) {
    if (points_.empty()) throw std::invalid_argument("property table needs >= 1 point");
    if (!std::is_sorted(points_.begin(), points_.end(),
                        [](const auto& a, const auto& b) { return a.first < b.first; }))
        throw std::invalid_argument("property table breakpoints must be sorted by T");
}

double PropertyTable::operator()(double T) const {
    if (points_.size() == 1) return points_.front().second;
    if (T <= points_.front().first) return points_.front().second;
    if (T >= points_.back().first) return points_.back().second;
    auto hi = std::upper_bound(points_.begin(), points_.end(), T,
                               [](double t, const auto& p) { return t < p.first; });
    auto lo = hi - 1;
    const double f = (T - lo->first) / (hi->first - lo->first);
    return lo->second + f * (hi->second - lo->second);
}

void MaterialModel::validate(double ambient_T) const {
    if (!(activation_T > solidus_T && solidus_T > ambient_T))
        throw std::invalid_argument("material: need activation_T > solidus_T > ambient");
    for (const PropertyTable* t : {&density, &specific_heat, &conductivity}) {
        for (double T = ambient_T; T <= activation_T; T += (activation_T - ambient_T) / 64.0)
            if ((*t)(T) <= 0.0)
                throw std::invalid_argument("material: non-positive property value");
    }
    if (enhanced_specific_heat <= 0.0 || h_inf < 0.0 || emissivity < 0.0)
        throw std::invalid_argument("material: bad surface/enhanced parameters");
}

double h_c(double T_celsius, const MaterialModel& model, double ambient_celsius) {
    const double Tk = T_celsius + 273.15;
    const double Ta = ambient_celsius + 273.15;
    const double poly = Tk * Tk * Tk + Tk * Tk * Ta + Tk * Ta * Ta + Ta * Ta * Ta;
    return model.h_inf + model.emissivity * model.stefan_boltzmann * poly;
}

double stable_dt(const MaterialModel& model, double element_size_mm, double ambient_T) {
    const double dx = element_size_mm * 1e-3;
    const double safety = 0.5;
    // rho*c_p/k_p is piecewise-rational in T; scan breakpoints plus a dense
    // grid to find the binding (smallest) value of the bound.
    auto bound_at = [&](double T) {
        return safety * model.density(T) * model.specific_heat(T) * dx * dx /
               (6.0 * model.conductivity(T));
    };
    double best = bound_at(ambient_T);
    const int samples = 256;
    for (int s = 1; s <= samples; ++s) {
        const double T = ambient_T + (model.activation_T - ambient_T) * s / samples;
        best = std::min(best, bound_at(T));
    }
    for (const PropertyTable* t : {&model.density, &model.specific_heat, &model.conductivity})
        for (const auto& [T, v] : t->points())
            if (T >= ambient_T && T <= model.activation_T) best = std::min(best, bound_at(T));
    return best;
}

double thermal_diffusivity_mm2s(const MaterialModel& model, double T_celsius) {
    const double alpha_m2s = model.conductivity(T_celsius) /
                             (model.density(T_celsius) * model.specific_heat(T_celsius));
    return alpha_m2s * 1e6;
}

} // namespace thermoforge
