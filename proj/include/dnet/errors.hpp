#ifndef DNET_ERRORS_HPP
#define DNET_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace dnet {

// Base class for all framework errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Tensor shape / geometry violations (mismatched extents, non-integral
// convolution output sizes, bad pooling inputs).
struct ShapeError : Error {
    using Error::Error;
};

// Problems with external data: files, formats, datasets, manifests.
struct DataError : Error {
    using Error::Error;
};

// NaN/Inf detected in a framework-produced value.
struct NumericError : Error {
    using Error::Error;
};

// Bad usage: invalid configuration values, unknown names, out-of-range flags.
struct ConfigError : Error {
    using Error::Error;
};

} // namespace dnet

#endif
