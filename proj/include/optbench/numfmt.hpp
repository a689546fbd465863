// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <string_view>

namespace optbench {

/// Shortest decimal form that parses back to the same double.
std::string format_double(double x);

/// Strict parse; throws ConfigError on trailing junk.
double parse_double(std::string_view s);

}  // namespace optbench
