#include "appshare/wire/datagram.hpp"

#include "appshare/error.hpp"
#include "appshare/wire/text.hpp"

#include <array>
#include <vector>

namespace appshare::wire {

namespace {

void check_field(std::string_view name, std::string_view value)
{
    if (value.empty())
        throw Error(Errc::EmptyField, std::string(name));
    if (!is_valid_utf8(value))
        throw Error(Errc::BadEncoding, std::string(name));
    if (value.find(kFieldDelimiter) != std::string_view::npos || value.find('\n') != std::string_view::npos
        || value.back() == '/') {
        throw Error(Errc::DelimiterInField, std::string(name) + " = '" + std::string(value) + "'");
    }
}

void check_address(std::string_view name, std::string_view value)
{
    if (!is_ipv4(value))
        throw Error(Errc::BadAddress, std::string(name) + " = '" + std::string(value) + "'");
}

struct FieldVisitor
{
    void operator()(const Query& q) const { check_field("app_name", q.app_name); }

    void operator()(const Reply& r) const
    {
        check_field("requester_ip", r.requester_ip);
        check_field("app_name", r.app_name);
        check_field("full_path", r.full_path);
        check_field("username", r.username);
        check_address("requester_ip", r.requester_ip);
    }

    void operator()(const Heartbeat& h) const
    {
        check_field("peer_id", h.peer_id);
        check_address("peer_id", h.peer_id);
    }

    void operator()(const Leave& l) const
    {
        check_field("peer_id", l.peer_id);
        check_address("peer_id", l.peer_id);
    }
};

template <typename... Fields>
std::string join(char tag, const Fields&... fields)
{
    std::string out(1, tag);
    ((out += kFieldDelimiter, out += fields), ...);
    return out;
}

} // namespace

bool is_field_safe(std::string_view value) noexcept
{
    return !value.empty() && is_valid_utf8(value) && value.find(kFieldDelimiter) == std::string_view::npos
           && value.find('\n') == std::string_view::npos && value.back() != '/';
}

void validate(const ClusterDatagram& d)
{
    std::visit(FieldVisitor{}, d);
}

std::string encode_datagram(const ClusterDatagram& d)
{
    validate(d);
    return std::visit(
        [](const auto& v) -> std::string {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, Query>)
                return join('0', v.app_name);
            else if constexpr (std::is_same_v<T, Reply>)
                return join('1', v.requester_ip, v.app_name, v.full_path, v.username);
            else if constexpr (std::is_same_v<T, Heartbeat>)
                return join('2', v.peer_id);
            else
                return join('3', v.peer_id);
        },
        d);
}

ClusterDatagram decode_datagram(std::string_view bytes)
{
    if (!is_valid_utf8(bytes))
        throw Error(Errc::BadEncoding, "datagram is not UTF-8");

    const auto parts = split(bytes, kFieldDelimiter);
    const auto tag = parts.front();
    if (tag.size() != 1 || tag[0] < '0' || tag[0] > '3')
        throw Error(Errc::UnknownType, "leading token '" + std::string(tag) + "'");

    static constexpr std::array<std::size_t, 4> kFieldCounts{1, 4, 1, 1};
    const int type = tag[0] - '0';
    if (parts.size() - 1 != kFieldCounts[type]) {
        throw Error(Errc::FieldCountMismatch, "type " + std::string(tag) + " expects "
                                                  + std::to_string(kFieldCounts[type]) + " fields, got "
                                                  + std::to_string(parts.size() - 1));
    }

    ClusterDatagram d;
    switch (type) {
    case 0:
        d = Query{std::string(parts[1])};
        break;
    case 1:
        d = Reply{std::string(parts[1]), std::string(parts[2]), std::string(parts[3]), std::string(parts[4])};
        break;
    case 2:
        d = Heartbeat{std::string(parts[1])};
        break;
    default:
        d = Leave{std::string(parts[1])};
        break;
    }
    validate(d);
    return d;
}

} // namespace appshare::wire
