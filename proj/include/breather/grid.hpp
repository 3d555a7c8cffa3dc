#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "vec3.hpp"

namespace breather {

using Complex = std::complex<double>;

enum class Axis : char { t = 't', x = 'x', y = 'y', z = 'z' };

/// Throws InvalidInput for anything but 't', 'x', 'y', 'z'.
Axis axis_from_label(char label);

struct SpacetimePoint {
    double t = 0.0;
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    Vec3 position() const { return {x, y, z}; }
    double& operator[](Axis a);
    double operator[](Axis a) const;
    friend bool operator==(const SpacetimePoint&, const SpacetimePoint&) = default;
};

inline SpacetimePoint at(double t, const Vec3& x) { return {t, x.x, x.y, x.z}; }

struct AxisSpec {
    Axis label;
    std::size_t count;
    double origin;
    double spacing;

    double coord(std::size_t i) const { return origin + static_cast<double>(i) * spacing; }
    friend bool operator==(const AxisSpec&, const AxisSpec&) = default;
};

/// Uniform rectilinear grid over a subset of {t, x, y, z}.
///
/// Axes are kept in canonical order t, x, y, z and flattened row-major, so the
/// first sampled axis varies slowest. Coordinates of axes that are not
/// sampled are taken from `base()`.
class Grid {
public:
    Grid() = default;
    explicit Grid(std::vector<AxisSpec> axes, SpacetimePoint base = {});

    /// Cube [lo, hi]^3 with n points per spatial axis, sampled at time t.
    static Grid spatial_cube(double lo, double hi, std::size_t n, double t = 0.0);

    const std::vector<AxisSpec>& axes() const { return axes_; }
    const AxisSpec& axis(std::size_t i) const { return axes_[i]; }
    std::size_t rank() const { return axes_.size(); }
    std::size_t size() const { return size_; }
    std::size_t stride(std::size_t i) const { return strides_[i]; }
    const SpacetimePoint& base() const { return base_; }

    std::optional<std::size_t> find(Axis a) const;
    bool has(Axis a) const { return find(a).has_value(); }
    bool has_time() const { return has(Axis::t); }
    std::size_t spatial_rank() const { return rank() - (has_time() ? 1 : 0); }

    void unravel(std::size_t flat, std::span<std::size_t> idx) const;
    std::size_t ravel(std::span<const std::size_t> idx) const;

    SpacetimePoint point(std::size_t flat) const;
    SpacetimePoint point(std::span<const std::size_t> idx) const;

    /// Same grid without its time axis, pinned at time t.
    Grid spatial(double t) const;
    double min_spatial_spacing() const;

    friend bool operator==(const Grid&, const Grid&) = default;

private:
    std::vector<AxisSpec> axes_;
    std::vector<std::size_t> strides_;
    std::size_t size_ = 0;
    SpacetimePoint base_;
};

/// Complex samples on a grid in row-major order.
struct ComplexField {
    Grid grid;
    std::vector<Complex> values;

    ComplexField() = default;
    explicit ComplexField(Grid g);
    ComplexField(Grid g, std::vector<Complex> v);

    std::size_t size() const { return values.size(); }
    Complex& operator[](std::size_t i) { return values[i]; }
    const Complex& operator[](std::size_t i) const { return values[i]; }
};

using PointFunction = std::function<Complex(const SpacetimePoint&)>;

/// values[i] = f(grid.point(i)). Runs the OpenMP kernel; throws InvalidInput
/// naming the first (lowest-index) coordinate where f is not finite.
ComplexField eval_on_grid(const PointFunction& f, const Grid& g);

}  // namespace breather
