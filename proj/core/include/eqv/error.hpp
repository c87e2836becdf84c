// Copyright 2026 The EQV Authors
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

namespace eqv {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
};

/// A qubit, slot, or label index outside its valid range.
class IndexError : public Error {
   public:
    using Error::Error;
};

/// A precondition on an argument was violated (bad probability, length
/// mismatch, empty input, ...).
class ArgumentError : public Error {
   public:
    using Error::Error;
};

/// A value type's invariant does not hold (e.g. a non-normalized state).
class InvariantError : public Error {
   public:
    using Error::Error;
};

/// Malformed on-disk data: bad magic, truncated file, unparsable field.
class FormatError : public Error {
   public:
    using Error::Error;
};

/// Invalid or inconsistent experiment configuration.
class ConfigError : public Error {
   public:
    using Error::Error;
};

}  // namespace eqv
