/*
 * Copyright 2026 The treezone Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *    http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "treezone/numcore/gradcheck.hpp"

namespace treezone::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;
inline constexpr int kExitNumeric = 3;

/// Runs one command line (without the program name). Errors are reported
/// on `err` and mapped to the exit codes above.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int main(int argc, char** argv);

/// Autodiff versus central differences for every parameter of a small
/// model over a random 7-node tree, hidden size 8, 64-bit. Runs with
/// zoneout off, with fixed sum-child masks and with fixed choose-child
/// picks; entry names carry a "plain/", "sum_child/" or "choose_child/"
/// prefix.
std::vector<GradCheckEntry> tree_gradient_check(std::uint64_t seed, double step = 1e-5);

/// Names of the subcommands, and every long flag each accepts.
std::vector<std::string> subcommands();
std::vector<std::string> flags_of(const std::string& subcommand);

}  // namespace treezone::cli
