#pragma once

#include <string>
#include <string_view>
#include <variant>

namespace appshare::wire {

//
// Cluster datagram format (UTF-8 text, no trailing newline):
//
//   0//<app_name>                                          query
//   1//<requester_ip>//<app_name>//<full_path>//<username> reply
//   2//<peer_id>                                           heartbeat
//   3//<peer_id>                                           leave
//
// Fields are never escaped. A field may not contain "//" or a newline, and
// may not end with '/' ("a/" + "//" + "b" reads back as "a" and "/b").
// A leading '/' is fine: splitting takes the leftmost "//".
//

inline constexpr std::string_view kFieldDelimiter = "//";

struct Query
{
    std::string app_name;
    bool operator==(const Query&) const = default;
};

struct Reply
{
    std::string requester_ip;
    std::string app_name;
    std::string full_path;
    std::string username;
    bool operator==(const Reply&) const = default;
};

struct Heartbeat
{
    std::string peer_id;
    bool operator==(const Heartbeat&) const = default;
};

struct Leave
{
    std::string peer_id;
    bool operator==(const Leave&) const = default;
};

using ClusterDatagram = std::variant<Query, Reply, Heartbeat, Leave>;

/// Type tag on the wire: 0 query, 1 reply, 2 heartbeat, 3 leave.
inline int type_tag(const ClusterDatagram& d) noexcept { return static_cast<int>(d.index()); }

/// Non-empty UTF-8 that can travel as a datagram field.
bool is_field_safe(std::string_view value) noexcept;

/// Throws Error{DelimiterInField | EmptyField | BadEncoding | BadAddress}.
void validate(const ClusterDatagram& d);

std::string encode_datagram(const ClusterDatagram& d);

/// Throws Error{UnknownType | FieldCountMismatch | BadEncoding | EmptyField |
/// DelimiterInField | BadAddress}.
ClusterDatagram decode_datagram(std::string_view bytes);

} // namespace appshare::wire
