#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "em_potential.hpp"
#include "execution.hpp"
#include "grid.hpp"
#include "stencil.hpp"

namespace breather {

/// Norms of a discrete residual over the interior of a grid. Points within
/// `interior_margin` cells of any boundary are excluded; stencils are never
/// one-sided.
struct ResidualReport {
    double linf = 0.0;
    double l2 = 0.0;  ///< root mean square over the interior samples
    Grid grid;
    std::size_t interior_margin = 0;
    std::size_t samples = 0;
};

/// Discrete Klein-Gordon operator [box Psi + Psi] on a spacetime field
/// (time axis plus one to three spatial axes). With potentials the full
/// minimally coupled operator
///   (d_t + i e U)^2 Psi - (grad - i e A)^2 Psi + Psi
/// is applied, U and A evaluated pointwise.
ResidualReport kg_residual(const ComplexField& psi, const StencilSpec& stencil,
                           const EMPotential* potentials = nullptr,
                           Execution exec = Execution::parallel);

/// Quantum Hamilton-Jacobi residual
///   (d_t S + e U)^2 - (grad S - e A)^2 - 1 - i box S
/// of an unwrapped action field. Throws ResolutionError when neighbouring
/// samples differ by more than pi in their real part (a branch jump).
ResidualReport qhj_residual(const ComplexField& action, const StencilSpec& stencil,
                            const EMPotential* potentials = nullptr,
                            Execution exec = Execution::parallel);

/// Nonrelativistic classical HJ residual d_t S + (grad S - e A)^2 / 2 + e U.
ResidualReport classical_action_residual(const ComplexField& action, const EMPotential& potentials,
                                         const StencilSpec& stencil,
                                         Execution exec = Execution::parallel);

/// S = -i ln Psi on every grid sample, branch chosen by continuity along
/// scan lines: first along the slowest axis at the grid origin, then along
/// each following axis seeded from the previous one.
ComplexField action_field_from_psi(const ComplexField& psi);

/// p = log(e1/e2) / log(h1/h2).
double observed_order(double h_coarse, double err_coarse, double h_fine, double err_fine);

/// Orders between consecutive refinement levels (h decreasing).
std::vector<double> pairwise_orders(std::span<const double> h, std::span<const double> err);

}  // namespace breather
