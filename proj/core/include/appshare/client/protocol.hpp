#pragma once

#include "appshare/types.hpp"
#include "appshare/wire/frame.hpp"
#include "appshare/wire/messages.hpp"

#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace appshare::client {

struct Welcomed
{
    SessionId session_id;
    std::uint8_t seamless_channel;
};

struct SpawnAcked
{
    WindowId win_id;
    std::string command;
};

struct Updated
{
    wire::UpdateNotice update;
};

struct Failed
{
    wire::ErrorNotice error;
    std::uint8_t channel;
};

struct Closed
{
    std::string reason;
};

struct Ignored
{};

using ClientEvent = std::variant<Welcomed, SpawnAcked, Updated, Failed, Closed, Ignored>;

/// Client side of the broker protocol without I/O: builds outgoing frames and
/// folds incoming ones into the window table and the update log.
class ClientProtocol
{
public:
    static wire::StreamFrame hello() { return {wire::kControlChannel, wire::Opcode::Hello, {}}; }
    static wire::StreamFrame bye() { return {wire::kControlChannel, wire::Opcode::Bye, {}}; }

    wire::StreamFrame spawn(std::string_view command) const;
    wire::StreamFrame focus(WindowId win_id, std::string_view flags = "0");
    wire::StreamFrame input(wire::InputKind kind, std::string_view payload) const;

    ClientEvent on_frame(const wire::StreamFrame& frame);

    bool negotiated() const noexcept { return session_id_.has_value(); }
    std::optional<SessionId> session_id() const noexcept { return session_id_; }
    std::uint8_t seamless_channel() const noexcept { return seamless_; }
    const std::map<WindowId, std::string>& windows() const noexcept { return windows_; }
    std::optional<WindowId> focused() const noexcept { return focused_; }

    /// Update bodies in arrival order.
    const std::vector<std::string>& update_log() const noexcept { return log_; }
    /// True when every window's updates arrived as 1, 2, 3, ...
    bool log_gapless() const noexcept { return gapless_; }

private:
    std::optional<SessionId> session_id_;
    std::uint8_t seamless_ = wire::kFirstSeamlessChannel;
    std::map<WindowId, std::string> windows_;
    std::optional<WindowId> focused_;
    std::map<WindowId, std::uint64_t> last_seq_;
    std::vector<std::string> log_;
    bool gapless_ = true;
};

} // namespace appshare::client
