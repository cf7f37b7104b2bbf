// Copyright 2026 The surfacelab Authors
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

#include <stdexcept>
#include <string>

namespace surfacelab {

/// Bad user input: malformed configuration, invalid arguments to a builder.
/// The CLI maps this to exit status 2.
class ConfigError : public std::invalid_argument {
public:
    explicit ConfigError(const std::string &what) : std::invalid_argument(what) {}
};

/// Bad or inconsistent data: corrupt shot files, calibration rows violating
/// their invariants, digest mismatches. The CLI maps this to exit status 3.
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string &what) : std::runtime_error(what) {}
};

/// A request exceeding a configured resource cap (e.g. statevector size).
class ResourceError : public std::runtime_error {
public:
    explicit ResourceError(const std::string &what) : std::runtime_error(what) {}
};

}  // namespace surfacelab
