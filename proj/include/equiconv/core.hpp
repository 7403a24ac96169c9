#pragma once

#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

namespace equiconv {

using cplx = std::complex<double>;

inline constexpr double pi = std::numbers::pi;

// sqrt(2/pi): normalisation of the Dirichlet sine basis on [0, pi].
inline const double sine_norm = std::sqrt(2.0 / pi);

// Error hierarchy.  Every failure the library reports derives from Error so
// that front ends can catch a single type and still tell the cases apart.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DomainError : Error {
  using Error::Error;
};

struct LocalizationError : Error {
  using Error::Error;
};

struct DegeneracyError : Error {
  using Error::Error;
};

struct ResolutionError : Error {
  ResolutionError(const std::string& what, int required)
      : Error(what + " (required M >= " + std::to_string(required) + ")"),
        required_m(required) {}
  int required_m;
};

struct GridMismatchError : Error {
  using Error::Error;
};

struct ConfigError : Error {
  using Error::Error;
};

}  // namespace equiconv
