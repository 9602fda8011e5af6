// Copyright (C) 2026 hopose project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace hopose {

// Base class for everything we throw on purpose.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string &msg) : std::runtime_error(msg) {}
};

// Input geometry does not constrain the problem (coplanar PnP points,
// zero-variance point clouds, collapsed bounding boxes, ...).
class DegenerateConfiguration : public Error {
 public:
  explicit DegenerateConfiguration(const std::string &msg) : Error(msg) {}
};

// Iterative solve broke down numerically. Carries the best estimate seen
// so the caller can still inspect it.
class NotConverged : public Error {
 public:
  NotConverged(const std::string &msg, double residual)
      : Error(msg), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_ = 0.0;
};

class DimensionMismatch : public Error {
 public:
  explicit DimensionMismatch(const std::string &msg) : Error(msg) {}
};

// A probability map that was supposed to sum to one does not.
class NotNormalized : public Error {
 public:
  explicit NotNormalized(const std::string &msg) : Error(msg) {}
};

class EmptyEnsemble : public Error {
 public:
  explicit EmptyEnsemble(const std::string &msg) : Error(msg) {}
};

// Malformed input file. line = 0 when there is no meaningful line number.
class ParseError : public Error {
 public:
  explicit ParseError(const std::string &msg, int line = 0)
      : Error(line > 0 ? msg + " (line " + std::to_string(line) + ")" : msg),
        line_(line) {}
  int line() const { return line_; }

 private:
  int line_ = 0;
};

}  // namespace hopose
