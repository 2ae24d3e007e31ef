#pragma once

#include <stdexcept>
#include <string>

namespace bvflow {

// Bad experiment description (missing fields, malformed drift spec, ...).
// The CLI maps this to exit code 2.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Runtime numerical failure (blow-up, divergent quadrature, unstable
// configuration, ...).  CLI exit code 3.
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace bvflow
