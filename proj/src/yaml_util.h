/* Copyright 2026 The Occ4D Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/
// Shared YAML parsing helpers; errors carry file:line and a field path.
#ifndef OCC4D_SRC_YAML_UTIL_H_
#define OCC4D_SRC_YAML_UTIL_H_

#include <cmath>
#include <filesystem>
#include <sstream>
#include <string>

#include <Eigen/Core>
#include <yaml-cpp/yaml.h>

#include "occ4d/error.h"

namespace occ4d::yaml_util {

namespace fs = std::filesystem;

inline std::string Where(const fs::path& file, const YAML::Node& node) {
  const YAML::Mark m = node.Mark();
  std::ostringstream os;
  os << file.string();
  if (m.line >= 0) os << ":" << (m.line + 1);
  return os.str();
}

[[noreturn]] inline void Fail(const fs::path& file, const YAML::Node& node,
                       const std::string& field, const std::string& what) {
  throw Error(ErrorCode::kParseError,
              Where(file, node) + ": " + field + ": " + what);
}

inline YAML::Node LoadYaml(const fs::path& path) {
  if (!fs::exists(path)) {
    throw Error(ErrorCode::kIoError, path.string() + ": file not found");
  }
  try {
    return YAML::LoadFile(path.string());
  } catch (const YAML::Exception& e) {
    throw Error(ErrorCode::kParseError,
                path.string() + ":" + std::to_string(e.mark.line + 1) + ": " +
                    e.msg);
  }
}

template <typename T>
T Field(const fs::path& file, const YAML::Node& map, const std::string& key,
        const std::string& ctx) {
  const YAML::Node n = map[key];
  if (!n) Fail(file, map, ctx + key, "missing field");
  try {
    return n.as<T>();
  } catch (const YAML::Exception&) {
    Fail(file, n, ctx + key, "cannot parse value");
  }
}

template <int N>
Eigen::Matrix<double, N, 1> Vec(const fs::path& file, const YAML::Node& map,
                                const std::string& key,
                                const std::string& ctx) {
  const YAML::Node n = map[key];
  if (!n) Fail(file, map, ctx + key, "missing field");
  if (!n.IsSequence() || n.size() != N) {
    Fail(file, n, ctx + key, "expected a list of " + std::to_string(N) + " numbers");
  }
  Eigen::Matrix<double, N, 1> v;
  for (int i = 0; i < N; ++i) {
    try {
      v[i] = n[i].as<double>();
    } catch (const YAML::Exception&) {
      Fail(file, n[i], ctx + key + "[" + std::to_string(i) + "]", "not a number");
    }
    if (!std::isfinite(v[i])) {
      Fail(file, n[i], ctx + key + "[" + std::to_string(i) + "]", "not finite");
    }
  }
  return v;
}

}  // namespace occ4d::yaml_util

#endif  // OCC4D_SRC_YAML_UTIL_H_
