#include "appshare/wire/messages.hpp"

#include "appshare/wire/text.hpp"

namespace appshare::wire {

namespace {

std::optional<std::uint32_t> parse_id(std::string_view text)
{
    const auto v = parse_uint(trim(text));
    if (!v || *v > 0xFFFFFFFFu)
        return std::nullopt;
    return static_cast<std::uint32_t>(*v);
}

/// Strips "<tag>," and returns the rest.
std::optional<std::string_view> after_tag(std::string_view body, std::string_view tag)
{
    if (body.size() <= tag.size() || body.substr(0, tag.size()) != tag || body[tag.size()] != ',')
        return std::nullopt;
    return body.substr(tag.size() + 1);
}

} // namespace

std::string welcome_body(const Welcome& w)
{
    return std::to_string(w.session_id) + "," + std::to_string(w.seamless_channel);
}

std::optional<Welcome> parse_welcome(std::string_view body)
{
    const auto parts = split(body, ",");
    if (parts.size() != 2)
        return std::nullopt;
    const auto sid = parse_id(parts[0]);
    const auto ch = parse_id(parts[1]);
    if (!sid || !ch || *ch > 255)
        return std::nullopt;
    return Welcome{*sid, static_cast<std::uint8_t>(*ch)};
}

std::string spawn_body(std::string_view command)
{
    return "spawn," + std::string(command);
}

std::optional<std::string> parse_spawn(std::string_view body)
{
    if (body == "spawn" || body == "spawn,")
        return std::string{};
    const auto rest = after_tag(body, "spawn");
    if (!rest)
        return std::nullopt;
    return std::string(trim(*rest));
}

std::string spawn_ack_body(const SpawnAck& ack)
{
    return "ack," + std::to_string(ack.win_id) + "," + ack.command;
}

std::optional<SpawnAck> parse_spawn_ack(std::string_view body)
{
    const auto rest = after_tag(body, "ack");
    if (!rest)
        return std::nullopt;
    const auto comma = rest->find(',');
    if (comma == std::string_view::npos)
        return std::nullopt;
    const auto id = parse_id(rest->substr(0, comma));
    if (!id)
        return std::nullopt;
    return SpawnAck{*id, std::string(rest->substr(comma + 1))};
}

std::string focus_body(WindowId win_id, std::string_view flags)
{
    return "focus," + std::to_string(win_id) + "," + std::string(flags);
}

std::optional<FocusRequest> parse_focus(std::string_view body)
{
    const auto rest = after_tag(body, "focus");
    if (!rest)
        return std::nullopt;
    const auto comma = rest->find(',');
    const auto id = parse_id(rest->substr(0, comma));
    if (!id)
        return std::nullopt;
    std::string flags = comma == std::string_view::npos ? "0" : std::string(trim(rest->substr(comma + 1)));
    return FocusRequest{*id, std::move(flags)};
}

std::string update_body(const UpdateNotice& u)
{
    return "upd," + std::to_string(u.win_id) + "," + std::to_string(u.seq) + "," + u.payload_hex;
}

std::optional<UpdateNotice> parse_update(std::string_view body)
{
    const auto rest = after_tag(body, "upd");
    if (!rest)
        return std::nullopt;
    const auto parts = split(*rest, ",");
    if (parts.size() != 3)
        return std::nullopt;
    const auto id = parse_id(parts[0]);
    const auto seq = parse_uint(parts[1]);
    if (!id || !seq)
        return std::nullopt;
    return UpdateNotice{*id, *seq, std::string(parts[2])};
}

std::string input_body(InputKind kind, std::string_view payload)
{
    std::string out(1, static_cast<char>(kind));
    out += payload;
    return out;
}

std::optional<InputPayload> parse_input(std::string_view body)
{
    if (body.empty())
        return std::nullopt;
    const char k = body.front();
    if (k != static_cast<char>(InputKind::Key) && k != static_cast<char>(InputKind::Pointer))
        return std::nullopt;
    if (body.size() - 1 > kMaxInputPayload)
        return std::nullopt;
    return InputPayload{static_cast<InputKind>(k), std::string(body.substr(1))};
}

std::string error_body(Errc code, std::string_view detail)
{
    std::string out = "err,";
    out += to_string(code);
    if (!detail.empty()) {
        out += ",";
        out += detail;
    }
    return out;
}

std::optional<ErrorNotice> parse_error(std::string_view body)
{
    const auto rest = after_tag(body, "err");
    if (!rest)
        return std::nullopt;
    const auto comma = rest->find(',');
    if (comma == std::string_view::npos)
        return ErrorNotice{std::string(*rest), {}};
    return ErrorNotice{std::string(rest->substr(0, comma)), std::string(rest->substr(comma + 1))};
}

StreamFrame error_frame(std::uint8_t channel, Errc code, std::string_view detail)
{
    return StreamFrame{channel, Opcode::Error, error_body(code, detail)};
}

} // namespace appshare::wire
