#pragma once

#include <stdexcept>
#include <string>

namespace pdreg {

/// Argument outside the mathematical domain of a function (non-finite, negative, ...).
struct domain_error : std::domain_error
{
  using std::domain_error::domain_error;
};

/// A numerical procedure failed to reach its accuracy target or produced a non-finite value.
struct numeric_error : std::runtime_error
{
  using std::runtime_error::runtime_error;
};

/// Invalid user-supplied configuration (sizes, grids, flags).
struct config_error : std::invalid_argument
{
  using std::invalid_argument::invalid_argument;
};

/// A valid configuration that this library does not implement (e.g. a
/// general estimator with a non-Gaussian kernel).
struct unsupported_configuration : config_error
{
  using config_error::config_error;
};

} // namespace pdreg
