#pragma once

#include <stdexcept>

namespace pc2 {

enum class VariableRole { deterministic, random };

/// Affine map between a physical interval [lower, upper] and the standardized
/// interval [-1, 1]. Endpoints map exactly; values outside the interval map
/// affinely (extrapolation is the caller's concern).
struct VariableTransform {
    VariableRole role = VariableRole::deterministic;
    double lower = -1.0;
    double upper = 1.0;

    VariableTransform() = default;
    VariableTransform(VariableRole r, double lo, double hi) : role(r), lower(lo), upper(hi) {
        if (!(lo < hi))
            throw std::invalid_argument("VariableTransform: lower bound must be strictly below upper");
    }

    static VariableTransform deterministic(double lo, double hi) {
        return {VariableRole::deterministic, lo, hi};
    }
    static VariableTransform random_uniform(double lo, double hi) {
        return {VariableRole::random, lo, hi};
    }

    /// Chain-rule factor d(xi)/d(x) = 2 / (upper - lower).
    double scale() const { return 2.0 / (upper - lower); }

    /// physical -> standardized; endpoints map to -1/+1 exactly.
    double to_standard(double x) const { return ((x - lower) - (upper - x)) / (upper - lower); }

    /// standardized -> physical; +-1 map back to the exact bounds.
    double from_standard(double xi) const {
        if (xi == -1.0) return lower;
        if (xi == 1.0) return upper;
        return 0.5 * (lower + upper) + 0.5 * xi * (upper - lower);
    }

    bool contains(double x) const { return x >= lower && x <= upper; }
};

}  // namespace pc2
