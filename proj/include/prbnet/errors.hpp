// Copyright 2026 The prbnet Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace prbnet {

/// Argument shapes or sizes that disagree with the callee's contract.
class ContractError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Argument values outside the domain of a mathematical operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// The implicit integrator failed to solve its stage equations.
class IntegrationError : public std::runtime_error {
 public:
  IntegrationError(const std::string& what, double time)
      : std::runtime_error(what + " (t = " + std::to_string(time) + " s)"), time_(time) {}
  double time() const { return time_; }

 private:
  double time_;
};

/// A rollout or loss produced a non-finite value.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(const std::string& what, long step)
      : std::runtime_error(what + " (step " + std::to_string(step) + ")"), step_(step) {}
  long step() const { return step_; }

 private:
  long step_;
};

/// Differentiation requested through something the tape cannot handle.
class UnsupportedOperation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

#define PRBNET_REQUIRE(cond, msg)                 \
  do {                                            \
    if (!(cond)) throw ::prbnet::ContractError(msg); \
  } while (0)

}  // namespace prbnet
