#pragma once

#include <chrono>
#include <cstdint>
#include <string_view>

namespace appshare {

using Clock = std::chrono::steady_clock;
using TimePoint = Clock::time_point;
using Duration = Clock::duration;

using SessionId = std::uint32_t;
using WindowId = std::uint32_t;

using namespace std::chrono_literals;

/// Brokered: many clients share one upstream terminal session.
/// Direct: every client gets its own upstream session (the multi-login baseline).
enum class Mode { Brokered, Direct };

std::string_view to_string(Mode mode) noexcept;
Mode parse_mode(std::string_view text);

inline double to_millis(Duration d)
{
    return std::chrono::duration<double, std::milli>(d).count();
}

} // namespace appshare
