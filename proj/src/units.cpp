#include "breather/units.hpp"

#include <cmath>
#include <string>

#include "breather/errors.hpp"

namespace breather {

UnitSystem::UnitSystem(double hbar, double mass, double c) : hbar_(hbar), mass_(mass), c_(c) {
    auto ok = [](double v) { return std::isfinite(v) && v > 0.0; };
    if (!ok(hbar) || !ok(mass) || !ok(c)) {
        throw InvalidInput("UnitSystem: hbar, mass and c must be finite and positive");
    }
    if (!(compton_length() > 0.0) || !(compton_time() > 0.0) || !std::isfinite(compton_time())) {
        throw InvalidInput("UnitSystem: Compton scales underflow or overflow");
    }
}

Dimension parse_dimension(std::string_view tag) {
    if (tag == "length") return Dimension::length;
    if (tag == "time") return Dimension::time;
    if (tag == "energy") return Dimension::energy;
    if (tag == "momentum") return Dimension::momentum;
    if (tag == "frequency") return Dimension::frequency;
    if (tag == "action") return Dimension::action;
    throw InvalidInput("unknown dimension tag '" + std::string(tag) + "'");
}

std::string_view to_string(Dimension d) {
    switch (d) {
        case Dimension::length: return "length";
        case Dimension::time: return "time";
        case Dimension::energy: return "energy";
        case Dimension::momentum: return "momentum";
        case Dimension::frequency: return "frequency";
        case Dimension::action: return "action";
    }
    return "?";
}

double unit_scale(Dimension d, const UnitSystem& u) {
    switch (d) {
        case Dimension::length: return u.compton_length();
        case Dimension::time: return u.compton_time();
        case Dimension::energy: return u.rest_energy();
        case Dimension::momentum: return u.mass() * u.c();
        case Dimension::frequency: return 1.0 / u.compton_time();
        case Dimension::action: return u.hbar();
    }
    throw InvalidInput("unknown dimension");
}

double to_internal(double physical, Dimension d, const UnitSystem& u) { return physical / unit_scale(d, u); }

double from_internal(double internal, Dimension d, const UnitSystem& u) { return internal * unit_scale(d, u); }

}  // namespace breather
