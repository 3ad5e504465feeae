#pragma once

#include <cmath>

#include "trimer1d/errors.hpp"

namespace trimer1d {

/// Kinetic coefficients of the heavy-heavy-light system in Jacobi coordinates.
struct MassParams {
    double mass_ratio = 1.0;  // M/m
    double alpha_x = 0.75;
    double alpha_y = 1.0;

    /// Continuum threshold of the BO problem in scaled units, -1/alpha_x.
    double bo_threshold() const { return -1.0 / alpha_x; }
};

inline MassParams make_masses(double mass_ratio) {
    require(mass_ratio > 0.0 && std::isfinite(mass_ratio), ErrorCode::invalid_argument,
            "mass ratio must be positive and finite");
    MassParams m;
    m.mass_ratio = mass_ratio;
    m.alpha_x = (1.0 + 2.0 * mass_ratio) / (2.0 * (1.0 + mass_ratio));
    m.alpha_y = 2.0 / (1.0 + mass_ratio);
    return m;
}

} // namespace trimer1d
