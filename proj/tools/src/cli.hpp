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

// Command-line front end. Kept as a library so tests can drive it in-process.
#pragma once

#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace sgcnn::cli {

enum ExitCode : int {
    kOk = 0,
    kInternal = 1,
    kUsage = 2,
    kIo = 3,
    kConfig = 4,
    kMismatch = 5,
    kNumeric = 6,
};

/// Runs one command. argv[0] is the program name. Errors are reported as a
/// single JSON line on `err`: {"error":"<kind>","exit_code":N,"message":"..."}.
int run(std::span<const std::string> argv, std::ostream& out, std::ostream& err);

}  // namespace sgcnn::cli
