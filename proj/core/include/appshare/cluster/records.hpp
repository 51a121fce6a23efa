#pragma once

#include "appshare/types.hpp"

#include <map>
#include <optional>
#include <string>
#include <utility>

namespace appshare::cluster {

/// A request this host has issued. Unique by app_name.
struct QueryRecord
{
    std::string app_name;
    TimePoint issued_at{};
    std::optional<TimePoint> last_broadcast;
};

/// A reply to one of our requests. Unique by (responder_ip, app_name): a
/// peer does not satisfy the same request twice.
struct ReplyRecord
{
    std::string responder_ip;
    std::string requester_ip;
    std::string app_name;
    std::string full_path;
    std::string username;
    TimePoint received_at{};
};

/// A request from another peer awaiting local processing. Unique by
/// (requester_ip, app_name).
struct PendingRequest
{
    std::string requester_ip;
    std::string app_name;
    TimePoint received_at{};
};

struct ConnectDirective
{
    std::string host_ip;
    std::string app_name;
    std::string full_path;
    std::string username;

    bool operator==(const ConnectDirective&) const = default;
};

// Each set is keyed on its uniqueness tuple.
using PairKey = std::pair<std::string, std::string>;
using QuerySet = std::map<std::string, QueryRecord, std::less<>>;
using ReplySet = std::map<PairKey, ReplyRecord>;
using PendingSet = std::map<PairKey, PendingRequest>;

} // namespace appshare::cluster
