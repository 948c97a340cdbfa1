#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace kwv {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input outside the domain an operation is defined on: mismatched grids,
// non-finite data, unsupported grid kinds.
class DomainError : public Error {
 public:
  using Error::Error;
};

// A requested quantity cannot be computed at the requested resolution or order.
class UnavailableError : public Error {
 public:
  using Error::Error;
};

// s below the existence threshold.
class ThresholdError : public Error {
 public:
  ThresholdError(const std::string& what, double s, double threshold)
      : Error(what), s_(s), threshold_(threshold) {}
  double s() const noexcept { return s_; }
  double threshold() const noexcept { return threshold_; }

 private:
  double s_;
  double threshold_;
};

class SolverError : public Error {
 public:
  using Error::Error;
};

// Iteration budget exhausted. Carries the sup-norm trace so far.
class NonConvergenceError : public SolverError {
 public:
  NonConvergenceError(const std::string& what, int iterations, std::vector<double> trace)
      : SolverError(what), iterations_(iterations), trace_(std::move(trace)) {}
  int iterations() const noexcept { return iterations_; }
  const std::vector<double>& trace() const noexcept { return trace_; }

 private:
  int iterations_;
  std::vector<double> trace_;
};

class MonotonicityError : public SolverError {
 public:
  MonotonicityError(const std::string& what, int iteration, double violation)
      : SolverError(what), iteration_(iteration), violation_(violation) {}
  int iteration() const noexcept { return iteration_; }
  double violation() const noexcept { return violation_; }

 private:
  int iteration_;
  double violation_;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t position)
      : Error(what + " at position " + std::to_string(position)), position_(position) {}
  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

class ConfigError : public Error {
 public:
  ConfigError(const std::string& path, const std::string& what)
      : Error(path + ": " + what), path_(path) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace kwv
