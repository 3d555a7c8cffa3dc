#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace breather {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A precondition on an argument was violated.
class InvalidInput : public Error {
public:
    using Error::Error;
};

/// Psi vanishes at a sample, so the action S = -i ln(Psi) is undefined there.
class SingularPointError : public Error {
public:
    using Error::Error;
};

/// Sampling too coarse to follow the phase continuously (|d arg| >= pi).
class ResolutionError : public Error {
public:
    using Error::Error;
};

/// Time stepping produced non-finite values.
class DivergenceError : public Error {
public:
    DivergenceError(const std::string& what, std::size_t step)
        : Error(what), step_(step) {}
    std::size_t step() const noexcept { return step_; }

private:
    std::size_t step_;
};

/// Characteristics crossed; the flagged grid indices are where the Jacobian lost its sign.
class CausticError : public Error {
public:
    CausticError(const std::string& what, std::vector<std::size_t> region)
        : Error(what), region_(std::move(region)) {}
    const std::vector<std::size_t>& region() const noexcept { return region_; }

private:
    std::vector<std::size_t> region_;
};

}  // namespace breather
