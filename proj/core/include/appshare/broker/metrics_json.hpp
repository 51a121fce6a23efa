#pragma once

#include "appshare/broker/broker.hpp"

#include <string>
#include <string_view>

namespace appshare::broker {

/// Contents of the broker's periodically rewritten stats file.
struct StatsFile
{
    MetricsSnapshot metrics;
    std::string mode;
    std::uint16_t listen_port = 0;
};

std::string stats_to_json(const StatsFile& s);
/// Throws Error{ParseError}.
StatsFile stats_from_json(std::string_view text);

} // namespace appshare::broker
