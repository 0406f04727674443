// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <chrono>
#include <string>

namespace valuenet::clock {

/// Current UTC time as "YYYY-MM-DDTHH:MM:SS.mmmZ".
std::string iso8601_utc_now();

/// Format an arbitrary system_clock time point the same way.
std::string iso8601_utc(std::chrono::system_clock::time_point tp);

}  // namespace valuenet::clock
