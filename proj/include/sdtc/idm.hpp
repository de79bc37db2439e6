#pragma once

#include <optional>

#include "sdtc/types.hpp"

namespace sdtc {

/// Intelligent Driver Model parameters.
struct IdmParams {
    double v0 = 15.35;   // desired speed (m/s)
    double T = 1.5;      // desired time headway (s)
    double s0 = 2.0;     // standstill minimum gap (m)
    double a_max = 5.0;  // maximum acceleration (m/s^2)
    double b = 3.0;      // comfortable deceleration (m/s^2)
    double omega = 4.0;  // free-road acceleration exponent

    void validate() const;
};

/// IDM acceleration for a vehicle at speed v. With a leader, s is the net gap
/// and dv the closing speed (v - v_leader); without one the interaction term
/// vanishes. Throws SimulationError when a leader is given with s <= 0.
double idm_acceleration(double v, std::optional<double> s, double dv, const IdmParams& p);

}  // namespace sdtc
