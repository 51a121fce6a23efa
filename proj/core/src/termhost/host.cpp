#include "appshare/termhost/host.hpp"

#include "appshare/error.hpp"
#include "appshare/wire/messages.hpp"
#include "appshare/wire/text.hpp"

#include <cassert>

namespace appshare::termhost {

using wire::Opcode;
using wire::StreamFrame;

std::uint64_t fnv1a(std::uint64_t hash, std::string_view bytes) noexcept
{
    for (char c : bytes) {
        hash ^= static_cast<unsigned char>(c);
        hash *= kFnvPrime;
    }
    return hash;
}

Host::Host(Mode mode, HostConfig cfg)
    : mode_(mode)
    , cfg_(cfg)
{}

std::optional<HostSessionId> Host::open_session()
{
    if (mode_ == Mode::Brokered && !sessions_.empty()) {
        ++refused_;
        return std::nullopt;
    }
    const auto id = next_session_++;
    Session s;
    s.desktop.assign(cfg_.session_surface_bytes, 0);
    sessions_.emplace(id, std::move(s));
    peak_sessions_ = std::max(peak_sessions_, sessions_.size());
    assert(mode_ != Mode::Brokered || sessions_.size() <= 1);
    return id;
}

void Host::close_session(HostSessionId id)
{
    if (sessions_.erase(id) == 0)
        return;
    std::erase_if(windows_, [id](const auto& kv) { return kv.second.owner == id; });
}

Host::Session& Host::session(HostSessionId id)
{
    auto it = sessions_.find(id);
    if (it == sessions_.end())
        throw Error(Errc::ProtocolViolation, "no host session " + std::to_string(id));
    return it->second;
}

WindowId Host::spawn_app(HostSessionId id, std::string_view command)
{
    auto& s = session(id);
    if (wire::trim(command).empty())
        throw Error(Errc::EmptyCommand, "spawn needs a command");

    WindowRecord w;
    w.win_id = next_window_++;
    w.command = std::string(command);
    w.owner = id;
    w.surface.assign(cfg_.window_surface_bytes, 0);
    const auto win_id = w.win_id;
    windows_.emplace(win_id, std::move(w));
    s.focused = win_id;
    return win_id;
}

void Host::set_focus(HostSessionId id, WindowId win_id, std::string_view /*flags*/)
{
    auto& s = session(id);
    auto it = windows_.find(win_id);
    if (it == windows_.end() || it->second.owner != id)
        throw Error(Errc::UnknownWindow, std::to_string(win_id));
    s.focused = win_id;
}

StreamFrame Host::apply_input(HostSessionId id, std::string_view payload)
{
    auto& s = session(id);
    if (!s.focused)
        throw Error(Errc::NoFocusedWindow, "input with nothing focused");
    auto& w = windows_.at(*s.focused);

    ++w.update_seq;
    w.state_hash = fnv1a(w.state_hash, payload);
    for (char c : payload) {
        const auto b = static_cast<std::uint8_t>(c);
        if (!w.surface.empty())
            w.surface[w.cursor++ % w.surface.size()] ^= b;
        if (!s.desktop.empty())
            s.desktop[s.cursor++ % s.desktop.size()] = b;
    }
    const wire::UpdateNotice u{w.win_id, w.update_seq, wire::to_hex(payload)};
    return StreamFrame{wire::kGlobalChannel, Opcode::Update, wire::update_body(u)};
}

std::vector<StreamFrame> Host::handle(HostSessionId id, const StreamFrame& frame)
{
    const auto seamless = cfg_.seamless_channel;
    std::vector<StreamFrame> out;
    try {
        switch (frame.opcode) {
        case Opcode::Hello:
            session(id);
            out.push_back({wire::kControlChannel, Opcode::Welcome, wire::welcome_body({id, seamless})});
            break;

        case Opcode::Spawn: {
            if (frame.channel != seamless)
                throw Error(Errc::ProtocolViolation, "spawn outside the seamless channel");
            const auto command = wire::parse_spawn(frame.body);
            if (!command)
                throw Error(Errc::ProtocolViolation, "malformed spawn");
            const auto win = spawn_app(id, *command);
            out.push_back({seamless, Opcode::SpawnAck, wire::spawn_ack_body({win, *command})});
            break;
        }

        case Opcode::Focus: {
            if (frame.channel != seamless)
                throw Error(Errc::ProtocolViolation, "focus outside the seamless channel");
            const auto focus = wire::parse_focus(frame.body);
            if (!focus)
                throw Error(Errc::ProtocolViolation, "malformed focus");
            set_focus(id, focus->win_id, focus->flags);
            break;
        }

        case Opcode::Input: {
            if (frame.channel != wire::kGlobalChannel)
                throw Error(Errc::ProtocolViolation, "input outside the global channel");
            const auto input = wire::parse_input(frame.body);
            if (!input)
                throw Error(Errc::ProtocolViolation, "malformed input");
            out.push_back(apply_input(id, input->payload));
            break;
        }

        case Opcode::Bye:
            break;

        default:
            throw Error(Errc::ProtocolViolation, "unexpected " + std::string(wire::to_string(frame.opcode)));
        }
    } catch (const Error& e) {
        const auto ch = frame.opcode == Opcode::Input ? wire::kGlobalChannel : seamless;
        std::string what = e.what();
        const auto colon = what.find(": ");
        out.push_back(wire::error_frame(ch, e.code(), colon == std::string::npos ? "" : what.substr(colon + 2)));
    }
    return out;
}

std::optional<WindowId> Host::server_focused(HostSessionId id) const
{
    auto it = sessions_.find(id);
    return it == sessions_.end() ? std::nullopt : it->second.focused;
}

std::optional<WindowId> Host::server_focused() const
{
    return sessions_.empty() ? std::nullopt : sessions_.begin()->second.focused;
}

const WindowRecord* Host::window(WindowId id) const
{
    auto it = windows_.find(id);
    return it == windows_.end() ? nullptr : &it->second;
}

std::vector<HostSessionId> Host::sessions() const
{
    std::vector<HostSessionId> ids;
    for (const auto& [id, s] : sessions_)
        ids.push_back(id);
    return ids;
}

std::uint64_t Host::session_retained_bytes(HostSessionId id) const
{
    auto it = sessions_.find(id);
    return it == sessions_.end() ? 0 : it->second.desktop.size();
}

std::uint64_t Host::window_retained_bytes(WindowId id) const
{
    auto it = windows_.find(id);
    return it == windows_.end() ? 0 : it->second.surface.size();
}

HostMetrics Host::metrics() const
{
    HostMetrics m;
    m.sessions = sessions_.size();
    m.peak_sessions = peak_sessions_;
    m.windows = windows_.size();
    m.refused = refused_;
    for (const auto& [id, s] : sessions_)
        m.retained_bytes += s.desktop.size();
    for (const auto& [id, w] : windows_)
        m.retained_bytes += w.surface.size();
    return m;
}

} // namespace appshare::termhost
