#include "appshare/cluster/peer_config.hpp"

#include "appshare/error.hpp"
#include "appshare/wire/text.hpp"

#include <fstream>
#include <sstream>

namespace appshare::cluster {

bool is_class_d(std::string_view address) noexcept
{
    if (!wire::is_ipv4(address))
        return false;
    const auto first = wire::parse_uint(address.substr(0, address.find('.')));
    return first && *first >= 224 && *first <= 239;
}

namespace {

void validate_group(const PeerConfig& cfg)
{
    if (!wire::is_ipv4(cfg.multicast_group))
        throw Error(Errc::BadAddress, "group '" + cfg.multicast_group + "'");
    if (!is_class_d(cfg.multicast_group))
        throw Error(Errc::NotClassD, cfg.multicast_group);
}

void validate_peer_id(const PeerConfig& cfg)
{
    if (!wire::is_ipv4(cfg.peer_id))
        throw Error(Errc::BadAddress, "peer_id '" + cfg.peer_id + "'");
}

} // namespace

void validate(const PeerConfig& cfg)
{
    validate_group(cfg);
    validate_peer_id(cfg);
}

PeerConfig parse_peer_config(std::string_view text, PeerConfig cfg)
{
    std::size_t line_no = 0;
    for (auto raw : wire::split(text, "\n")) {
        ++line_no;
        const auto line = wire::trim(raw);
        if (line.empty() || line.front() == '#' || line.front() == ';' || line.front() == '[')
            continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos)
            throw Error(Errc::ConfigError, "line " + std::to_string(line_no) + ": expected key=value");

        const auto key = wire::trim(line.substr(0, eq));
        auto value = wire::trim(line.substr(eq + 1));
        if (value.size() >= 2 && value.front() == '"' && value.back() == '"')
            value = value.substr(1, value.size() - 2);

        auto number = [&]() {
            const auto v = wire::parse_uint(value);
            if (!v)
                throw Error(Errc::ConfigError, "line " + std::to_string(line_no) + ": " + std::string(key)
                                                   + " needs a non-negative integer");
            return *v;
        };

        if (key == "group") {
            cfg.multicast_group = std::string(value);
        } else if (key == "port") {
            const auto p = number();
            if (p == 0 || p > 65535)
                throw Error(Errc::ConfigError, "port out of range");
            cfg.multicast_port = static_cast<std::uint16_t>(p);
        } else if (key == "heartbeat_period_ms") {
            cfg.heartbeat_period = std::chrono::milliseconds(number());
        } else if (key == "rebroadcast_period_ms") {
            cfg.query_rebroadcast_period = std::chrono::milliseconds(number());
        } else if (key == "request_timeout_ms") {
            cfg.request_timeout = std::chrono::milliseconds(number());
        } else if (key == "max_sessions") {
            cfg.max_sessions = number();
        } else if (key == "peer_id") {
            cfg.peer_id = std::string(value);
        } else {
            throw Error(Errc::ConfigError, "unknown key '" + std::string(key) + "'");
        }
    }
    validate_group(cfg);
    if (!cfg.peer_id.empty())
        validate_peer_id(cfg);
    return cfg;
}

PeerConfig load_peer_config(const std::filesystem::path& path, PeerConfig base)
{
    std::ifstream in(path);
    if (!in)
        throw Error(Errc::ConfigError, "cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_peer_config(ss.str(), std::move(base));
}

} // namespace appshare::cluster
