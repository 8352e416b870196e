// Copyright (c) the tfac contributors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace tfac {

// Base of every failure the library raises on purpose. Catch this to map
// failures to process exit codes; catch the subclasses to tell gates apart.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed user input: bad config values, inconsistent dimensions.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// A model failed its validation gate (tail divergence, endpoint growth,
// enclosure violations).
class ValidationError : public Error {
 public:
  using Error::Error;
};

// A contour failed its admissibility gate, or an operation that requires an
// admissible contour was invoked without one.
class AdmissibilityError : public Error {
 public:
  using Error::Error;
};

// An evaluation point violates a domain constraint (on the branch cut, outside
// the holomorphy region, too close to the contour).
class DomainError : public Error {
 public:
  using Error::Error;
};

// Spectrum of an operator argument touches the contour, or an eigenvalue
// cluster cannot be isolated by a loop.
class SeparationError : public Error {
 public:
  using Error::Error;
};

// Iteration exceeded its budget or left its uniqueness ball.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

// Dense linear algebra gave up (non-finite input, eigensolver failure).
class NumericsError : public Error {
 public:
  using Error::Error;
};

}  // namespace tfac
