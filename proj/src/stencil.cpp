#include "breather/stencil.hpp"

#include <cmath>
#include <string>

#include "breather/errors.hpp"

namespace breather {

void StencilSpec::validate() const {
    if (order != 2 && order != 4) throw InvalidInput("StencilSpec: order must be 2 or 4");
    for (double h : spacing) {
        if (!(h > 0.0) || !std::isfinite(h)) throw InvalidInput("StencilSpec: spacing must be positive");
    }
}

void StencilSpec::check_against(const Grid& g) const {
    validate();
    if (spacing.empty()) return;
    if (spacing.size() != g.rank()) throw InvalidInput("StencilSpec: spacing count differs from grid rank");
    for (std::size_t i = 0; i < g.rank(); ++i) {
        if (std::abs(spacing[i] - g.axis(i).spacing) > 1e-12 * g.axis(i).spacing) {
            throw InvalidInput("StencilSpec: spacing on axis " + std::to_string(i) + " differs from the grid");
        }
    }
}

const std::vector<double>& first_derivative_weights(int order) {
    static const std::vector<double> second{-0.5, 0.0, 0.5};
    static const std::vector<double> fourth{1.0 / 12.0, -8.0 / 12.0, 0.0, 8.0 / 12.0, -1.0 / 12.0};
    if (order == 2) return second;
    if (order == 4) return fourth;
    throw InvalidInput("first_derivative_weights: order must be 2 or 4");
}

const std::vector<double>& second_derivative_weights(int order) {
    static const std::vector<double> second{1.0, -2.0, 1.0};
    static const std::vector<double> fourth{-1.0 / 12.0, 16.0 / 12.0, -30.0 / 12.0, 16.0 / 12.0, -1.0 / 12.0};
    if (order == 2) return second;
    if (order == 4) return fourth;
    throw InvalidInput("second_derivative_weights: order must be 2 or 4");
}

}  // namespace breather
