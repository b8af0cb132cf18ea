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

#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "tickbench/random.hpp"

using namespace tickbench;

TEST(Random, StreamsAreReproducible) {
  RandomStream a(42), b(42);
  for (int i = 0; i < 100; ++i) {
    EXPECT_EQ(a.next_u64(), b.next_u64());
  }
  EXPECT_EQ(a.counter(), 100u);
}

TEST(Random, DerivedSeedsDiffer) {
  std::set<uint64_t> seen;
  for (uint64_t tag = 0; tag < 1000; ++tag) {
    seen.insert(derive_seed(7, tag));
  }
  EXPECT_EQ(seen.size(), 1000u);
  EXPECT_NE(derive_seed(7, "policy"), derive_seed(7, "obs-position"));
  EXPECT_NE(derive_seed(7, "policy"), derive_seed(8, "policy"));
  EXPECT_EQ(derive_seed(7, "policy"), derive_seed(7, "policy"));
}

TEST(Random, UniformRangeAndMoments) {
  RandomStream r(1);
  double sum = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double u = r.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
  }
  EXPECT_NEAR(sum / n, 0.5, 0.005);
}

TEST(Random, NormalMoments) {
  RandomStream r(9);
  double s1 = 0.0, s2 = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double x = r.normal();
    ASSERT_TRUE(std::isfinite(x));
    s1 += x;
    s2 += x * x;
  }
  EXPECT_NEAR(s1 / n, 0.0, 0.01);
  EXPECT_NEAR(s2 / n, 1.0, 0.02);
}
