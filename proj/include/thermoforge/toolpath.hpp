#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "thermoforge/geometry.hpp"

namespace thermoforge {

struct DepositionEvent {
    int i = 0, j = 0, k = 0; // element index in the build domain
    double time_s = 0.0;
};

// Serpentine deposition order over the part voxels. Times are i*dt with
// dt = element_size / tool_speed; skipped void cells consume no time.
struct ActivationSchedule {
    std::vector<DepositionEvent> events;
    double dt = 0.0;         // s between successive activations
    double tool_speed = 0.0; // mm/s
};

struct ScheduleStats {
    std::size_t count = 0;
    double duration_s = 0.0;
    double dt = 0.0;
};

ActivationSchedule plan_zigzag(const BuildDomain& domain, double tool_speed_mm_s);

ScheduleStats schedule_stats(const ActivationSchedule& schedule);

// FNV-1a over the event stream; used for dataset provenance.
std::uint64_t schedule_hash(const ActivationSchedule& schedule);

// Text format: header "# zigzag v1 dt=<dt>", then "t i j k" per line.
void save_toolpath(const ActivationSchedule& schedule, const std::string& path);
ActivationSchedule load_toolpath(const std::string& path);

} // namespace thermoforge
