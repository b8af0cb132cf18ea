// Copyright 2026 The tickbench Authors
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

namespace tickbench {

/// Malformed JSON or a document that does not match its schema.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A well-formed document that violates a domain invariant.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Run configuration constraint violated (e.g. H_c > H_p).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Degenerate geometric input (zero-length polyline, ...).
class GeometryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A policy could not produce an action (remote disconnect, bad output).
class PolicyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Episode could not be completed.
class EpisodeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Wire protocol failure: timeout, malformed message, version mismatch.
class ProtocolError : public std::runtime_error {
 public:
  enum class Kind { kTimeout, kMalformed, kVersionMismatch, kDisconnected };

  ProtocolError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

}  // namespace tickbench
