#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace sdtc {

using VehicleId = std::int64_t;
using RoadId = std::string;

/// Invalid scenario or controller parameters; message names the offending field.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Internal consistency failure during a run (e.g. collision fault). Must never occur.
struct SimulationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace sdtc
