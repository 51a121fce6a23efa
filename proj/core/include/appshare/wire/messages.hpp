#pragma once

#include "appshare/error.hpp"
#include "appshare/types.hpp"
#include "appshare/wire/frame.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace appshare::wire {

// Frame bodies exchanged between client, broker and terminal host:
//
//   Welcome   <session_id>,<seamless_channel_id>
//   Spawn     spawn,<command>
//   SpawnAck  ack,<win_id>,<command>
//   Focus     focus,<win_id>,<flags>
//   Input     <kind byte 'K' or 'P'><payload>
//   Update    upd,<win_id>,<seq>,<hex payload>
//   Error     err,<ErrorName>[,<detail>]
//   Bye       free-form reason

enum class InputKind : char { Key = 'K', Pointer = 'P' };

inline constexpr std::size_t kMaxInputPayload = 4096;

struct Welcome
{
    SessionId session_id = 0;
    std::uint8_t seamless_channel = kFirstSeamlessChannel;
};

struct SpawnAck
{
    WindowId win_id = 0;
    std::string command;
};

struct FocusRequest
{
    WindowId win_id = 0;
    std::string flags;
};

struct UpdateNotice
{
    WindowId win_id = 0;
    std::uint64_t seq = 0;
    std::string payload_hex;
};

struct InputPayload
{
    InputKind kind = InputKind::Key;
    std::string payload;
};

struct ErrorNotice
{
    std::string name;
    std::string detail;
    std::optional<Errc> code() const { return errc_from_string(name); }
};

std::string welcome_body(const Welcome& w);
std::optional<Welcome> parse_welcome(std::string_view body);

std::string spawn_body(std::string_view command);
/// Returns the command (leading blanks trimmed; may be empty).
std::optional<std::string> parse_spawn(std::string_view body);

std::string spawn_ack_body(const SpawnAck& ack);
std::optional<SpawnAck> parse_spawn_ack(std::string_view body);

std::string focus_body(WindowId win_id, std::string_view flags = "0");
std::optional<FocusRequest> parse_focus(std::string_view body);

std::string update_body(const UpdateNotice& u);
std::optional<UpdateNotice> parse_update(std::string_view body);

std::string input_body(InputKind kind, std::string_view payload);
std::optional<InputPayload> parse_input(std::string_view body);

std::string error_body(Errc code, std::string_view detail = {});
std::optional<ErrorNotice> parse_error(std::string_view body);

StreamFrame error_frame(std::uint8_t channel, Errc code, std::string_view detail = {});

} // namespace appshare::wire
