#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "action.hpp"
#include "execution.hpp"
#include "grid.hpp"

namespace breather {

inline constexpr std::size_t kMaxImages = 10000;

/// d-periodic train of spherical breathers drifting with speed v along x,
/// truncated to 2K + 1 images.
struct TrainSpec {
    double d = 1.0;
    double v = 0.0;
    Complex alpha{0.0, 0.0};
    std::size_t K = 1;

    /// d > 0, |v| < 1, |alpha| < 1, K <= kMaxImages. K = 0 keeps only the
    /// central breather and has no finite certificate.
    void validate() const;
    /// Bound on |train(x + d) - train(x)| for 0 <= x - v t < d caused by truncation:
    /// 2 (1 + ln 2) / (sqrt(3) K d).
    double certificate() const;
};

/// Smallest K whose certificate is below `tolerance`.
std::size_t images_for_tolerance(double d, double tolerance);

/// Sum over k = -K..K of j_0(sqrt(3) r_k) with
/// r_k^2 = ((x - v t - k d) / sqrt(1 - v^2))^2 + y^2 + z^2.
/// Terms are combined by a pairwise tree in fixed order.
double train_sum(const TrainSpec& spec, const SpacetimePoint& pt);

/// S = -E t + p x - i Log{1 + alpha exp(i(-E t + p x)) train_sum}.
/// Requires E^2 = p^2 + 1 and p / E = spec.v; throws SingularPointError when
/// the logarithm's argument vanishes.
ActionValue train_action(const TrainSpec& spec, const SpacetimePoint& pt, double E, double p);

/// Psi = exp(i S) of the train solution, computed without a logarithm.
Complex train_psi(const TrainSpec& spec, const SpacetimePoint& pt, double E, double p);

/// p_n = 2 pi n / d for n = 0..n_max.
std::vector<double> quantized_momenta(double d, int n_max);

/// Largest |S(x + d) - S(x) - p d| over the samples, each S difference
/// taken with the branch followed continuously along x in steps of at
/// most `path_step`. Samples should satisfy 0 <= x - v t < d.
double periodicity_defect(const TrainSpec& spec, double E, double p, std::span<const SpacetimePoint> samples,
                          double path_step = 0.05, Execution exec = Execution::parallel);

struct ScanRow {
    double p = 0.0;
    double defect = 0.0;
    double certificate = 0.0;
    bool is_quantized = false;
};

/// Defect over p in [0, n_max 2 pi / d] with `subdivisions` points per half
/// quantum, so every p_n and every midpoint is sampled exactly. The train
/// drifts with v = p / E at each p.
std::vector<ScanRow> quantization_scan(double d, Complex alpha, std::size_t K, int n_max, int subdivisions,
                                       std::span<const SpacetimePoint> samples, double path_step = 0.05,
                                       Execution exec = Execution::parallel);

// Two perfectly reflecting walls at x = 0 and x = d/2: the interval is
// doubled into a two-sheeted strip whose unfolded coordinate lives in [0, d).

enum class Sheet { upper, lower };

struct StripPoint {
    double x = 0.0;
    Sheet sheet = Sheet::upper;
};

/// Upper sheet maps x -> x, lower sheet x -> d - x. Requires 0 <= x <= d/2.
double fold_two_wall(double x, Sheet sheet, double d);
/// Inverse of fold_two_wall for y in [0, d).
StripPoint unfold_to_strip(double y, double d);
/// d(unfolded)/dx on a sheet: +1 upper, -1 lower.
double fold_orientation(Sheet sheet);

/// Two-wall shuttling action: the train action at the unfolded coordinate.
ActionValue two_wall_action(const TrainSpec& spec, const StripPoint& x, double y, double z, double t,
                            double E, double p);

// Breather circulating in a thin toroidal duct.

struct TorusSpec {
    double R = 200.0;
    double d_duct = 10.0;
    int n = 5;
    Complex alpha{0.1, 0.0};

    double p_phi() const { return static_cast<double>(n) / R; }
    double v_phi() const { return p_phi(); }
    /// 1 + v_phi^2 / 2.
    double energy() const;
    /// d_duct >= 10, R >= 10 d_duct, |v_phi| <= 0.1, |alpha| < 1.
    void validate() const;
};

struct CylindricalPoint {
    double rho = 0.0;
    double phi = 0.0;
    double z = 0.0;
};

/// S = -E t + p_phi R phi - i Log{1 + alpha exp(i(-E t + p_phi R phi)) j_0(sqrt(3) r)},
/// r^2 = s^2 + (rho - R)^2 + z^2 with s the centerline arc from the breather
/// center R phi_c = v_phi t, wrapped into (-pi R, pi R]. Evaluation is
/// restricted to |rho - R| <= d_duct and |z| <= d_duct.
ActionValue torus_action(const TorusSpec& spec, const CylindricalPoint& pt, double t);
Complex torus_psi(const TorusSpec& spec, const CylindricalPoint& pt, double t);

/// Change of Re S once around the centerline at time t, branch-tracked over
/// `samples` steps of phi. Equals 2 pi n for the regular part.
double torus_winding(const TorusSpec& spec, double t, std::size_t samples);

/// Centerline angle in [0, 2 pi) where |breather term| peaks at time t, from a
/// grid of `samples` angles refined by a three-point parabola.
double torus_envelope_angle(const TorusSpec& spec, double t, std::size_t samples);

}  // namespace breather
