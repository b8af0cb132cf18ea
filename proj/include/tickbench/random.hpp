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

#include <cstdint>
#include <string_view>

namespace tickbench {

uint64_t splitmix64(uint64_t x);

/// Derives an independent child seed from a parent seed and a tag.
uint64_t derive_seed(uint64_t parent, uint64_t tag);
uint64_t derive_seed(uint64_t parent, std::string_view tag);

/// Counter-based random stream: draw k is a pure function of (key, k), so
/// streams never interfere and results do not depend on the standard
/// library's distribution implementations.
class RandomStream {
 public:
  explicit RandomStream(uint64_t key = 0) : key_(key) {}

  uint64_t next_u64();
  /// Uniform in [0, 1) with 53 bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Standard normal (Box-Muller, no caching).
  double normal();

  uint64_t key() const { return key_; }
  uint64_t counter() const { return counter_; }

 private:
  uint64_t key_;
  uint64_t counter_ = 0;
};

}  // namespace tickbench
