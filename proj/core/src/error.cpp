// Copyright 2026 The flagtune Authors
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

#include "flagtune/error.hpp"

namespace flagtune {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::invalid_argument: return "invalid-argument";
    case ErrorKind::parse: return "parse-error";
    case ErrorKind::numerical: return "numerical-error";
    case ErrorKind::target_failure: return "target-failure";
    case ErrorKind::dependency_missing: return "dependency-missing";
    case ErrorKind::io: return "io-error";
  }
  return "error";
}

}  // namespace flagtune
