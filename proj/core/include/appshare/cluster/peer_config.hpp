#pragma once

#include "appshare/types.hpp"

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace appshare::cluster {

using namespace std::chrono_literals;

struct PeerConfig
{
    std::string multicast_group = "234.5.6.7";
    std::uint16_t multicast_port = 45678;
    Duration heartbeat_period = 2s;
    Duration query_rebroadcast_period = 3s;
    Duration request_timeout = 30s;
    std::string peer_id; ///< this peer's dotted-quad address
    std::size_t max_sessions = 5;
};

/// Throws Error{NotClassD} for a group outside 224.0.0.0/4 and
/// Error{BadAddress} for a malformed group or peer_id.
void validate(const PeerConfig& cfg);

bool is_class_d(std::string_view address) noexcept;

/// key=value lines; keys: group, port, heartbeat_period_ms,
/// rebroadcast_period_ms, request_timeout_ms, max_sessions, peer_id.
/// Unknown keys and malformed values throw Error{ConfigError}; the group is
/// checked like validate(). peer_id may be left out for the caller to fill in.
PeerConfig parse_peer_config(std::string_view text, PeerConfig base = {});
PeerConfig load_peer_config(const std::filesystem::path& path, PeerConfig base = {});

} // namespace appshare::cluster
