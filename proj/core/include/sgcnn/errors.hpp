// Licensed under the Apache License, Version 2.0 (the "License"); you
// may not use this file except in compliance with the License.  You
// may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or
// implied.  See the License for the specific language governing
// permissions and limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace sgcnn {

// Base for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Invalid or inconsistent configuration (bad selector, k > n in a config,
// mismatched embedding dimension, ...).
class ConfigError : public Error {
public:
    using Error::Error;
};

// A caller broke an operation's precondition (shape mismatch, k > n).
class ContractError : public Error {
public:
    using Error::Error;
};

// Non-finite values reached a place where they must not propagate.
class NumericError : public Error {
public:
    using Error::Error;
};

// API misuse, e.g. backward() before any forward pass was recorded.
class UsageError : public Error {
public:
    using Error::Error;
};

// File missing, unreadable, or malformed on disk.
class IoError : public Error {
public:
    using Error::Error;
};

// Checkpoint and run configuration disagree (e.g. num_classes).
class MismatchError : public Error {
public:
    using Error::Error;
};

}  // namespace sgcnn
