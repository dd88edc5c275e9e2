#pragma once

#include <cstddef>
#include <exception>
#include <stdexcept>
#include <string>
#include <utility>

namespace fluxrelax {

/// Base class of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Caller violated a documented precondition.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Malformed or inconsistent input data (files, datasets).
class DataError : public Error {
 public:
  using Error::Error;
};

/// A numerical procedure failed to produce a trustworthy answer.
class NumericalError : public Error {
 public:
  using Error::Error;
};

class ConvergenceError : public NumericalError {
 public:
  ConvergenceError(const std::string& what, double last_delta)
      : NumericalError(what), last_delta_(last_delta) {}
  double last_delta() const noexcept { return last_delta_; }

 private:
  double last_delta_;
};

/// A qubit transition sits inside the guard band around the resonator.
class ResonanceCollision : public NumericalError {
 public:
  ResonanceCollision(const std::string& what, std::size_t from, std::size_t to)
      : NumericalError(what), from_(from), to_(to) {}
  std::size_t from() const noexcept { return from_; }
  std::size_t to() const noexcept { return to_; }

 private:
  std::size_t from_;
  std::size_t to_;
};

/// Wraps an error raised while processing one element of a sweep.
class SweepError : public Error {
 public:
  SweepError(const std::string& what, std::size_t index, std::exception_ptr cause)
      : Error(what), index_(index), cause_(std::move(cause)) {}
  std::size_t index() const noexcept { return index_; }
  /// The original exception, for callers that classify by type.
  const std::exception_ptr& cause() const noexcept { return cause_; }

 private:
  std::size_t index_;
  std::exception_ptr cause_;
};

}  // namespace fluxrelax
