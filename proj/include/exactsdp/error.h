#ifndef EXACTSDP_ERROR_H_
#define EXACTSDP_ERROR_H_

#include <stdexcept>
#include <string>

namespace exactsdp {

// Base class for every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class ConvergenceError : public Error {
 public:
  using Error::Error;
};

}  // namespace exactsdp

#endif  // EXACTSDP_ERROR_H_
