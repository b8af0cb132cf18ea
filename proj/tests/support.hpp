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

#include <filesystem>
#include <string>

#include "tickbench/map.hpp"

namespace test_support {

inline std::filesystem::path data_path(const std::string& rel) {
  return std::filesystem::path(TICKBENCH_TEST_DATA) / rel;
}

inline const tickbench::MapModel& loop_map() {
  static const tickbench::MapModel map = tickbench::load_map(data_path("maps/loop_intersection.json"));
  return map;
}

inline const tickbench::MapModel& straight_map() {
  static const tickbench::MapModel map = tickbench::load_map(data_path("maps/straight.json"));
  return map;
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("tickbench_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace test_support
