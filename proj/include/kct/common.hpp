#pragma once

#include <Eigen/Dense>

#include <charconv>
#include <complex>
#include <map>
#include <stdexcept>
#include <string>

namespace kct {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using Complex = std::complex<double>;

// Free-form provenance (source, seed, window offsets). Ordered so that
// serialized output is stable.
using Meta = std::map<std::string, std::string>;

// Shortest decimal text that parses back to the identical double.
inline std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

// Error hierarchy. The CLI maps each kind onto an exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad arguments or flag combinations supplied by the caller.
class UsageError : public Error {
 public:
  using Error::Error;
};

// Shape, cardinality, or value problems in the input data.
class DataError : public Error {
 public:
  using Error::Error;
};

// Numerically degenerate input (zero data, rank collapse, singular step).
class NumericalError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace kct
