#include "sdtc/idm.hpp"

#include <algorithm>
#include <cmath>

namespace sdtc {

void IdmParams::validate() const {
    if (!(v0 > 0.0)) throw ConfigError("IdmParams.v0 must be > 0");
    if (!(T >= 0.0)) throw ConfigError("IdmParams.T must be >= 0");
    if (!(s0 > 0.0)) throw ConfigError("IdmParams.s0 must be > 0");
    if (!(a_max > 0.0)) throw ConfigError("IdmParams.a_max must be > 0");
    if (!(b > 0.0)) throw ConfigError("IdmParams.b must be > 0");
    if (!(omega > 0.0)) throw ConfigError("IdmParams.omega must be > 0");
}

double idm_acceleration(double v, std::optional<double> s, double dv, const IdmParams& p) {
    const double free_term = std::pow(std::max(v, 0.0) / p.v0, p.omega);
    double interaction = 0.0;
    if (s) {
        if (*s <= 0.0) throw SimulationError("idm_acceleration: non-positive gap (collision)");
        const double s_star =
            p.s0 + std::max(0.0, v * p.T + v * dv / (2.0 * std::sqrt(p.a_max * p.b)));
        interaction = (s_star / *s) * (s_star / *s);
    }
    return p.a_max * (1.0 - free_term - interaction);
}

}  // namespace sdtc
