#pragma once

#include <complex>
#include <numbers>

namespace breather {

/// Complex action sample (units of hbar) with the winding index of the
/// logarithm it was taken on. `value` already includes 2*pi*branch, so
/// psi() does not depend on the branch bookkeeping.
struct ActionValue {
    std::complex<double> value{};
    int branch = 0;

    std::complex<double> psi() const {
        return std::exp(std::complex<double>(0.0, 1.0) * value);
    }
    /// Value moved back onto the principal branch.
    std::complex<double> principal() const {
        return value - 2.0 * std::numbers::pi * static_cast<double>(branch);
    }
    ActionValue shifted(int k) const {
        return {value + 2.0 * std::numbers::pi * static_cast<double>(k), branch + k};
    }
};

}  // namespace breather
