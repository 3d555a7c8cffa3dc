#include "breather/grid.hpp"

#include <cmath>
#include <sstream>
#include <string>

#include "breather/errors.hpp"
#include "breather/kernels.hpp"

namespace breather {

namespace {

int canonical_rank(Axis a) {
    switch (a) {
        case Axis::t: return 0;
        case Axis::x: return 1;
        case Axis::y: return 2;
        case Axis::z: return 3;
    }
    return -1;
}

}  // namespace

Axis axis_from_label(char label) {
    switch (label) {
        case 't': return Axis::t;
        case 'x': return Axis::x;
        case 'y': return Axis::y;
        case 'z': return Axis::z;
        default: throw InvalidInput(std::string("unknown axis label '") + label + "'");
    }
}

double& SpacetimePoint::operator[](Axis a) {
    switch (a) {
        case Axis::t: return t;
        case Axis::x: return x;
        case Axis::y: return y;
        case Axis::z: return z;
    }
    throw InvalidInput("bad axis");
}

double SpacetimePoint::operator[](Axis a) const { return const_cast<SpacetimePoint&>(*this)[a]; }

Grid::Grid(std::vector<AxisSpec> axes, SpacetimePoint base) : axes_(std::move(axes)), base_(base) {
    if (axes_.empty() || axes_.size() > 4) throw InvalidInput("Grid: between one and four axes required");
    for (std::size_t i = 0; i < axes_.size(); ++i) {
        const auto& a = axes_[i];
        if (canonical_rank(a.label) < 0) throw InvalidInput("Grid: bad axis label");
        if (i > 0 && canonical_rank(a.label) <= canonical_rank(axes_[i - 1].label)) {
            throw InvalidInput("Grid: axes must be distinct and ordered t, x, y, z");
        }
        if (a.count < 1) throw InvalidInput("Grid: every axis needs at least one sample");
        if (!(a.spacing > 0.0) || !std::isfinite(a.spacing) || !std::isfinite(a.origin)) {
            throw InvalidInput("Grid: spacing must be positive and finite");
        }
        base_[a.label] = a.origin;
    }
    strides_.assign(axes_.size(), 1);
    size_ = 1;
    for (std::size_t i = axes_.size(); i-- > 0;) {
        strides_[i] = size_;
        size_ *= axes_[i].count;
    }
}

Grid Grid::spatial_cube(double lo, double hi, std::size_t n, double t) {
    if (n < 2 || !(hi > lo)) throw InvalidInput("spatial_cube: need n >= 2 and hi > lo");
    const double h = (hi - lo) / static_cast<double>(n - 1);
    return Grid({{Axis::x, n, lo, h}, {Axis::y, n, lo, h}, {Axis::z, n, lo, h}}, SpacetimePoint{t, 0, 0, 0});
}

std::optional<std::size_t> Grid::find(Axis a) const {
    for (std::size_t i = 0; i < axes_.size(); ++i) {
        if (axes_[i].label == a) return i;
    }
    return std::nullopt;
}

void Grid::unravel(std::size_t flat, std::span<std::size_t> idx) const {
    for (std::size_t i = 0; i < axes_.size(); ++i) {
        idx[i] = flat / strides_[i];
        flat -= idx[i] * strides_[i];
    }
}

std::size_t Grid::ravel(std::span<const std::size_t> idx) const {
    std::size_t flat = 0;
    for (std::size_t i = 0; i < axes_.size(); ++i) flat += idx[i] * strides_[i];
    return flat;
}

SpacetimePoint Grid::point(std::size_t flat) const {
    SpacetimePoint p = base_;
    for (std::size_t i = 0; i < axes_.size(); ++i) {
        const std::size_t k = flat / strides_[i];
        flat -= k * strides_[i];
        p[axes_[i].label] = axes_[i].coord(k);
    }
    return p;
}

SpacetimePoint Grid::point(std::span<const std::size_t> idx) const {
    SpacetimePoint p = base_;
    for (std::size_t i = 0; i < axes_.size(); ++i) p[axes_[i].label] = axes_[i].coord(idx[i]);
    return p;
}

Grid Grid::spatial(double t) const {
    std::vector<AxisSpec> rest;
    for (const auto& a : axes_) {
        if (a.label != Axis::t) rest.push_back(a);
    }
    if (rest.empty()) throw InvalidInput("Grid::spatial: grid has no spatial axis");
    SpacetimePoint b = base_;
    b.t = t;
    return Grid(std::move(rest), b);
}

double Grid::min_spatial_spacing() const {
    double h = INFINITY;
    for (const auto& a : axes_) {
        if (a.label != Axis::t) h = std::min(h, a.spacing);
    }
    return h;
}

ComplexField::ComplexField(Grid g) : grid(std::move(g)), values(grid.size()) {}

ComplexField::ComplexField(Grid g, std::vector<Complex> v) : grid(std::move(g)), values(std::move(v)) {
    if (values.size() != grid.size()) throw InvalidInput("ComplexField: value count does not match grid shape");
}

ComplexField eval_on_grid(const PointFunction& f, const Grid& g) {
    ComplexField out(g);
    const std::size_t bad = kernels::omp::map_grid(g, f, out.values);
    if (bad != kernels::kNoIndex) {
        const auto p = g.point(bad);
        std::ostringstream os;
        os.precision(17);
        os << "eval_on_grid: non-finite value at (t=" << p.t << ", x=" << p.x << ", y=" << p.y << ", z=" << p.z
           << ")";
        throw InvalidInput(os.str());
    }
    return out;
}

}  // namespace breather
