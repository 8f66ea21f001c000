// Copyright 2026 The cheaptalk Authors
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

#include <cstddef>
#include <stdexcept>
#include <string>

namespace cheaptalk {

// Base of everything the library throws.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

class InvalidBracket : public Error {
 public:
  using Error::Error;
};

class ZeroProbabilityInterval : public Error {
 public:
  using Error::Error;
};

class InvalidPartition : public DomainError {
 public:
  using DomainError::DomainError;
};

// The solver established that no equilibrium with the requested structure
// exists. The CLI maps this family to exit status 2.
class NoEquilibrium : public Error {
 public:
  using Error::Error;
};

class NoInformativeEquilibrium : public NoEquilibrium {
 public:
  using NoEquilibrium::NoEquilibrium;
};

// A bin length or ordering constraint failed. `bin()` is 1-based.
class BinCollapse : public NoEquilibrium {
 public:
  BinCollapse(std::size_t bin, const std::string& what)
      : NoEquilibrium(what + " (bin " + std::to_string(bin) + ")"), bin_(bin) {}
  std::size_t bin() const noexcept { return bin_; }

 private:
  std::size_t bin_;
};

class NonConvergence : public Error {
 public:
  NonConvergence(std::size_t iterations, const std::string& what)
      : Error(what + " after " + std::to_string(iterations) + " iterations"),
        iterations_(iterations) {}
  std::size_t iterations() const noexcept { return iterations_; }

 private:
  std::size_t iterations_;
};

class EdgeOrderingViolation : public Error {
 public:
  EdgeOrderingViolation(std::size_t iteration, std::size_t edge)
      : Error("edge ordering violated at edge " + std::to_string(edge) +
              " during iteration " + std::to_string(iteration)),
        iteration_(iteration),
        edge_(edge) {}
  std::size_t iteration() const noexcept { return iteration_; }
  std::size_t edge() const noexcept { return edge_; }

 private:
  std::size_t iteration_;
  std::size_t edge_;
};

}  // namespace cheaptalk
