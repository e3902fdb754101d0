#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace kronsensus {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A requested object would exceed a configured dimension cap.
class SizeError : public Error {
 public:
  using Error::Error;
};

// Arguments outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

// An infinite series or cost is undefined (essential spectral radius >= 1).
class DivergenceError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Iterative numerics failed; carries whatever was computed before the failure.
class NumericError : public Error {
 public:
  NumericError(const std::string& what, std::vector<std::complex<double>> partial)
      : Error(what), partial_(std::move(partial)) {}

  const std::vector<std::complex<double>>& partial_results() const { return partial_; }

 private:
  std::vector<std::complex<double>> partial_;
};

}  // namespace kronsensus
