// Copyright 2026 The cvxreg Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace cvxreg {

// Structural errors (bad inputs, violated invariants) are thrown.
// Recoverable non-convergence is reported through status fields on result
// structs instead, so callers get the best iterate plus diagnostics.

class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

class DimensionMismatchError : public Error {
 public:
  explicit DimensionMismatchError(const std::string& what) : Error(what) {}
};

class DuplicateSiteError : public Error {
 public:
  DuplicateSiteError(int i, int j, const std::string& what)
      : Error(what), first(i), second(j) {}
  int first;
  int second;
};

class TooFewPointsError : public Error {
 public:
  explicit TooFewPointsError(const std::string& what) : Error(what) {}
};

class InvalidClassError : public Error {
 public:
  explicit InvalidClassError(const std::string& what) : Error(what) {}
};

// The conjugate-coordinate transform is defined for finite L only.
class InfiniteLError : public Error {
 public:
  explicit InfiniteLError(const std::string& what) : Error(what) {}
};

class InvalidRhoError : public Error {
 public:
  explicit InvalidRhoError(const std::string& what) : Error(what) {}
};

// A P_nu = P0 + nu*P1 factorization failed; P0 is positive-definite by
// construction, so this signals a violated invariant, not a user error.
class SingularSystemError : public Error {
 public:
  explicit SingularSystemError(const std::string& what) : Error(what) {}
};

class FactorizationFailedError : public Error {
 public:
  explicit FactorizationFailedError(const std::string& what) : Error(what) {}
};

class OracleNotConvergedError : public Error {
 public:
  explicit OracleNotConvergedError(const std::string& what) : Error(what) {}
};

}  // namespace cvxreg
