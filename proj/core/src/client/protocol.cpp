#include "appshare/client/protocol.hpp"

namespace appshare::client {

using wire::Opcode;
using wire::StreamFrame;

StreamFrame ClientProtocol::spawn(std::string_view command) const
{
    return {seamless_, Opcode::Spawn, wire::spawn_body(command)};
}

StreamFrame ClientProtocol::focus(WindowId win_id, std::string_view flags)
{
    if (windows_.count(win_id) != 0)
        focused_ = win_id;
    return {seamless_, Opcode::Focus, wire::focus_body(win_id, flags)};
}

StreamFrame ClientProtocol::input(wire::InputKind kind, std::string_view payload) const
{
    return {wire::kGlobalChannel, Opcode::Input, wire::input_body(kind, payload)};
}

ClientEvent ClientProtocol::on_frame(const StreamFrame& frame)
{
    switch (frame.opcode) {
    case Opcode::Welcome:
        if (auto w = wire::parse_welcome(frame.body)) {
            session_id_ = w->session_id;
            seamless_ = w->seamless_channel;
            return Welcomed{w->session_id, w->seamless_channel};
        }
        return Ignored{};

    case Opcode::SpawnAck:
        if (auto ack = wire::parse_spawn_ack(frame.body)) {
            windows_[ack->win_id] = ack->command;
            if (!focused_)
                focused_ = ack->win_id;
            return SpawnAcked{ack->win_id, ack->command};
        }
        return Ignored{};

    case Opcode::Update:
        if (auto u = wire::parse_update(frame.body)) {
            auto& last = last_seq_[u->win_id];
            if (u->seq != last + 1)
                gapless_ = false;
            last = u->seq;
            log_.push_back(frame.body);
            return Updated{std::move(*u)};
        }
        return Ignored{};

    case Opcode::Error:
        if (auto e = wire::parse_error(frame.body))
            return Failed{std::move(*e), frame.channel};
        return Ignored{};

    case Opcode::Bye:
        return Closed{frame.body};

    default:
        return Ignored{};
    }
}

} // namespace appshare::client
