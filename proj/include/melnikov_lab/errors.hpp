#pragma once

#include <stdexcept>
#include <string>

namespace mlab {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// integrator
struct StepFailure : Error { using Error::Error; };
struct NonFinite : Error { using Error::Error; };
struct DegenerateCrossing : Error { using Error::Error; };

// arguments outside the domain of a closed form or special function
struct DomainError : Error { using Error::Error; };

// variational
struct NoUnitEigenvalue : Error { using Error::Error; };

// melnikov / systems
struct ResonanceMismatch : Error { using Error::Error; };
struct NoResonance : Error { using Error::Error; };

// cli
struct ConfigError : Error { using Error::Error; };

}  // namespace mlab
