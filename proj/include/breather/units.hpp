#pragma once

#include <string_view>

namespace breather {

/// Physical values of hbar, m and c. Numerics run in natural units where all
/// three equal one; this type is only needed to convert at the boundary.
class UnitSystem {
public:
    /// Throws InvalidInput unless all three are finite and strictly positive.
    UnitSystem(double hbar, double mass, double c);

    /// hbar = m = c = 1.
    static UnitSystem natural() { return {1.0, 1.0, 1.0}; }

    double hbar() const { return hbar_; }
    double mass() const { return mass_; }
    double c() const { return c_; }

    double compton_length() const { return hbar_ / (mass_ * c_); }
    double compton_time() const { return hbar_ / (mass_ * c_ * c_); }
    double rest_energy() const { return mass_ * c_ * c_; }

private:
    double hbar_;
    double mass_;
    double c_;
};

enum class Dimension { length, time, energy, momentum, frequency, action };

/// Accepts the lower-case tag names; throws InvalidInput otherwise.
Dimension parse_dimension(std::string_view tag);
std::string_view to_string(Dimension d);

/// Physical value of one internal unit of the given dimension.
double unit_scale(Dimension d, const UnitSystem& u);

double to_internal(double physical, Dimension d, const UnitSystem& u);
double from_internal(double internal, Dimension d, const UnitSystem& u);

}  // namespace breather
