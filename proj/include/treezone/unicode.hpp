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

#include <string>
#include <string_view>
#include <vector>

namespace treezone::unicode {

/// NFC-normalized copy of a UTF-8 string. Invalid UTF-8 is returned
/// unchanged.
std::string nfc(std::string_view utf8);

/// Locale-independent full lowercase mapping of a UTF-8 string.
std::string lower(std::string_view utf8);

/// Splits UTF-8 into code-point-sized substrings.
std::vector<std::string> code_points(std::string_view utf8);

}  // namespace treezone::unicode
