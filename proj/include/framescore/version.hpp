// Copyright 2026 the framescore authors.
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

#ifndef FRAMESCORE_VERSION_HPP
#define FRAMESCORE_VERSION_HPP

namespace framescore {

// Stamped into every run_config.json. Deliberately not a timestamp so that
// repeated runs stay byte-identical.
inline constexpr const char* kToolVersion = "0.1.0";

}  // namespace framescore

#endif  // FRAMESCORE_VERSION_HPP
