#pragma once

#include <vector>

#include "grid.hpp"

namespace breather {

/// Central finite-difference stencil of accuracy order 2 or 4.
struct StencilSpec {
    int order = 2;
    /// Per-axis steps. Empty means "take them from the field's grid"; when
    /// given they must match the grid.
    std::vector<double> spacing;

    int half_width() const { return order / 2; }
    void validate() const;
    void check_against(const Grid& g) const;
};

/// Weights w[-hw..hw] (stored from index 0) of the centred first and second
/// derivatives for the given order, before division by h and h^2.
const std::vector<double>& first_derivative_weights(int order);
const std::vector<double>& second_derivative_weights(int order);

}  // namespace breather
