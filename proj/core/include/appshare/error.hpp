#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace appshare {

enum class Errc {
    // wire
    DelimiterInField,
    EmptyField,
    UnknownType,
    FieldCountMismatch,
    BadEncoding,
    BadAddress,
    OversizeFrame,
    // cluster
    NotClassD,
    BindFailure,
    ConfigError,
    // apppool
    ParseError,
    DuplicateApp,
    UnknownApp,
    // broker
    UpstreamUnreachable,
    HandshakeTimeout,
    ProtocolViolation,
    NotYourWindow,
    QueueOverflow,
    SessionLimit,
    // termhost
    EmptyCommand,
    UnknownWindow,
    NoFocusedWindow,
    // client
    BrokerUnreachable,
    MasterSocketInUse,
    NoMaster,
    Timeout,
    // harness
    TooFewRows,
    SessionSetupFailure,
};

std::string_view to_string(Errc code) noexcept;
std::optional<Errc> errc_from_string(std::string_view name) noexcept;

/// Every failure surfaced by the library carries one of the codes above; the
/// message adds context for humans only.
class Error : public std::runtime_error
{
public:
    explicit Error(Errc code, const std::string& detail = {});

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

} // namespace appshare
