#pragma once

#include <stdexcept>
#include <string>

namespace zrp {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Argument outside the domain of an operation (e.g. outside a tabulated box).
class DomainError : public Error {
 public:
  using Error::Error;
};

// A partition-function series does not converge at the requested fugacity.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

// Density at or beyond criticality where only sub-critical input is allowed,
// or a solver left the sub-critical region.
class CriticalityError : public Error {
 public:
  using Error::Error;
};

// Exact enumeration requested on a state space that is too large.
class FeasibilityError : public Error {
 public:
  using Error::Error;
};

// Lattice with zero total jump intensity.
class FrozenStateError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace zrp
