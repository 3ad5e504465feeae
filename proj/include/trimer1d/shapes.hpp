#pragma once

#include <cmath>
#include <functional>
#include <numbers>
#include <optional>
#include <string>

#include "trimer1d/errors.hpp"

namespace trimer1d {

enum class ShapeKind { contact, gaussian, cubic_lorentzian, custom };

/// Symmetric, non-negative interaction profile f with v(x) = v0 f(x), v0 < 0.
/// Custom shapes must satisfy f(x) = f(-x) and x^2 f(x) -> 0.
struct PotentialShape {
    ShapeKind kind = ShapeKind::gaussian;
    std::function<double(double)> eval;
    std::optional<double> integral;
    std::string label;

    bool is_contact() const { return kind == ShapeKind::contact; }

    double operator()(double x) const {
        if (is_contact()) fail(ErrorCode::contact_not_representable,
                               "contact interaction has no pointwise profile");
        return eval(x);
    }
};

inline PotentialShape contact_shape() {
    return {ShapeKind::contact, {}, 1.0, "contact"};
}

inline PotentialShape gaussian_shape() {
    return {ShapeKind::gaussian, [](double x) { return std::exp(-x * x); },
            std::sqrt(std::numbers::pi), "gaussian"};
}

inline PotentialShape cubic_lorentzian_shape() {
    return {ShapeKind::cubic_lorentzian,
            [](double x) {
                const double d = 1.0 + x * x;
                return 1.0 / (d * d * d);
            },
            3.0 * std::numbers::pi / 8.0, "lorentzian3"};
}

inline PotentialShape custom_shape(std::function<double(double)> f,
                                   std::optional<double> integral = std::nullopt,
                                   std::string label = "custom") {
    return {ShapeKind::custom, std::move(f), integral, std::move(label)};
}

/// Accepts "contact", "gaussian", "lorentzian3" (alias "cubic_lorentzian").
inline PotentialShape shape_from_name(const std::string& name) {
    if (name == "contact") return contact_shape();
    if (name == "gaussian") return gaussian_shape();
    if (name == "lorentzian3" || name == "cubic_lorentzian") return cubic_lorentzian_shape();
    fail(ErrorCode::invalid_argument, "unknown shape '" + name + "'");
}

} // namespace trimer1d
