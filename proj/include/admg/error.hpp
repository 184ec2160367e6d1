#pragma once

#include <stdexcept>
#include <string>

namespace admg {

struct Error : std::runtime_error
{
    using std::runtime_error::runtime_error;
};

// Malformed graph or graph query (unknown vertex, cycle, bad edge).
struct GraphError : Error
{
    using Error::Error;
};

// Bad user input: data files, parameter files, option values.
struct InputError : Error
{
    using Error::Error;
};

// Numerical failure: non-positive parameters, singular information, ...
struct NumericalError : Error
{
    using Error::Error;
};

} // namespace admg
