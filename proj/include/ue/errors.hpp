// Copyright (c) 2026 uecheck developers
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace ue {

/// Base class for all errors raised by this library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// A matrix is not area-preserving (|det - 1| out of tolerance) or has
/// non-finite entries, or a norm computation received impossible input.
class InvalidMatrixError : public Error {
 public:
  using Error::Error;
};

/// Contracting direction requested for a matrix too close to a rotation.
class DirectionUndefinedError : public Error {
 public:
  using Error::Error;
};

/// A formula was evaluated at a configuration where its denominator
/// degenerates (backtracking regime).
class SingularConfigurationError : public Error {
 public:
  using Error::Error;
};

/// The normal vector is too small to define a frame at a surface point.
class SingularFrameError : public Error {
 public:
  using Error::Error;
};

/// A point drifted off its invariant surface beyond the repair tolerance,
/// or left the coordinate range.
class NumericalDriftError : public Error {
 public:
  using Error::Error;
};

/// An operation was called outside its stated domain.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

}  // namespace ue
