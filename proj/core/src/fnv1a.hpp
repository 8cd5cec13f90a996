//
// Copyright 2026 The NL2KQL Authors
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
//
#ifndef NL2KQL_SRC_FNV1A_HPP_
#define NL2KQL_SRC_FNV1A_HPP_

#include <cstdint>
#include <string_view>

namespace nl2kql::detail {

// FNV-1a 64. Bit-stable across platforms; used wherever a reproducible
// content hash is needed (feature bucketing, request transcript keys).
inline std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t hash = 1469598103934665603ull;
  for (unsigned char byte : data) {
    hash ^= byte;
    hash *= 1099511628211ull;
  }
  return hash;
}

}  // namespace nl2kql::detail

#endif  // NL2KQL_SRC_FNV1A_HPP_
