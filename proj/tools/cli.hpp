/*
 * Copyright 2026 The dualmink Authors.
 * This file is licensed to you under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License. You may obtain a copy
 * of the License at http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software distributed under
 * the License is distributed on an "AS IS" BASIS, WITHOUT WARRANTIES OR REPRESENTATIONS
 * OF ANY KIND, either express or implied. See the License for the specific language
 * governing permissions and limitations under the License.
 */
#pragma once

namespace dualmink::cli {

enum ExitCode : int {
    kOk = 0,
    kSuiteFailure = 1,
    kUsage = 2,
    kDegenerate = 3,
};

/// Parses argv, dispatches one subcommand, and returns its exit code. Diagnostics go to
/// stderr; results go to the requested files or stdout.
int run(int argc, char** argv);

} // namespace dualmink::cli
