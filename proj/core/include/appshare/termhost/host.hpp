#pragma once

#include "appshare/types.hpp"
#include "appshare/wire/frame.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace appshare::termhost {

using HostSessionId = std::uint32_t;

struct HostConfig
{
    /// Desktop surface every logged-in session holds.
    std::size_t session_surface_bytes = 64 * 1024;
    /// Surface held by each spawned window.
    std::size_t window_surface_bytes = 8 * 1024;
    std::uint8_t seamless_channel = wire::kFirstSeamlessChannel;
};

inline constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ull;
inline constexpr std::uint64_t kFnvPrime = 0x100000001b3ull;

std::uint64_t fnv1a(std::uint64_t hash, std::string_view bytes) noexcept;

struct WindowRecord
{
    WindowId win_id = 0;
    std::string command;
    HostSessionId owner = 0;
    std::uint64_t update_seq = 0;
    std::uint64_t state_hash = kFnvOffset;
    std::vector<std::uint8_t> surface;
    std::size_t cursor = 0;
};

struct HostMetrics
{
    std::size_t sessions = 0;
    std::size_t peak_sessions = 0;
    std::size_t windows = 0;
    std::uint64_t refused = 0;
    std::uint64_t retained_bytes = 0;
};

/// Deterministic stand-in for a terminal server with a seamless-window
/// endpoint. Applications are synchronous echo windows: every input applied
/// to the focused window produces exactly one update, and nothing else does.
///
/// Brokered mode admits one session at a time; direct mode admits any number
/// and tracks focus per session. Window ids are never reused.
class Host
{
public:
    explicit Host(Mode mode, HostConfig cfg = {});

    Mode mode() const noexcept { return mode_; }
    const HostConfig& config() const noexcept { return cfg_; }

    /// nullopt when refused (brokered mode with a live session).
    std::optional<HostSessionId> open_session();
    /// Also destroys the session's windows.
    void close_session(HostSessionId id);

    /// Protocol entry point: returns the frames to send back on this session.
    std::vector<wire::StreamFrame> handle(HostSessionId id, const wire::StreamFrame& frame);

    /// Throws Error{EmptyCommand}. The new window takes the session's focus.
    WindowId spawn_app(HostSessionId id, std::string_view command);
    /// Throws Error{UnknownWindow}; flags are opaque.
    void set_focus(HostSessionId id, WindowId win_id, std::string_view flags);
    /// Throws Error{NoFocusedWindow}.
    wire::StreamFrame apply_input(HostSessionId id, std::string_view payload);

    std::optional<WindowId> server_focused(HostSessionId id) const;
    /// Focus of the lowest-numbered live session (the only one when brokered).
    std::optional<WindowId> server_focused() const;

    const WindowRecord* window(WindowId id) const;
    std::vector<HostSessionId> sessions() const;
    std::size_t session_count() const noexcept { return sessions_.size(); }

    std::uint64_t session_retained_bytes(HostSessionId id) const;
    std::uint64_t window_retained_bytes(WindowId id) const;
    HostMetrics metrics() const;

private:
    struct Session
    {
        std::optional<WindowId> focused;
        std::vector<std::uint8_t> desktop;
        std::size_t cursor = 0;
    };

    Session& session(HostSessionId id);

    Mode mode_;
    HostConfig cfg_;
    std::map<HostSessionId, Session> sessions_;
    std::map<WindowId, WindowRecord> windows_;
    HostSessionId next_session_ = 1;
    WindowId next_window_ = 1;
    std::size_t peak_sessions_ = 0;
    std::uint64_t refused_ = 0;
};

} // namespace appshare::termhost
