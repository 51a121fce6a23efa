#include "appshare/error.hpp"

#include <array>
#include <utility>

namespace appshare {

namespace {

constexpr std::array<std::pair<Errc, std::string_view>, 28> kNames{{
    {Errc::DelimiterInField, "DelimiterInField"},
    {Errc::EmptyField, "EmptyField"},
    {Errc::UnknownType, "UnknownType"},
    {Errc::FieldCountMismatch, "FieldCountMismatch"},
    {Errc::BadEncoding, "BadEncoding"},
    {Errc::BadAddress, "BadAddress"},
    {Errc::OversizeFrame, "OversizeFrame"},
    {Errc::NotClassD, "NotClassD"},
    {Errc::BindFailure, "BindFailure"},
    {Errc::ConfigError, "ConfigError"},
    {Errc::ParseError, "ParseError"},
    {Errc::DuplicateApp, "DuplicateApp"},
    {Errc::UnknownApp, "UnknownApp"},
    {Errc::UpstreamUnreachable, "UpstreamUnreachable"},
    {Errc::HandshakeTimeout, "HandshakeTimeout"},
    {Errc::ProtocolViolation, "ProtocolViolation"},
    {Errc::NotYourWindow, "NotYourWindow"},
    {Errc::QueueOverflow, "QueueOverflow"},
    {Errc::SessionLimit, "SessionLimit"},
    {Errc::EmptyCommand, "EmptyCommand"},
    {Errc::UnknownWindow, "UnknownWindow"},
    {Errc::NoFocusedWindow, "NoFocusedWindow"},
    {Errc::BrokerUnreachable, "BrokerUnreachable"},
    {Errc::MasterSocketInUse, "MasterSocketInUse"},
    {Errc::NoMaster, "NoMaster"},
    {Errc::Timeout, "Timeout"},
    {Errc::TooFewRows, "TooFewRows"},
    {Errc::SessionSetupFailure, "SessionSetupFailure"},
}};

} // namespace

std::string_view to_string(Errc code) noexcept
{
    for (const auto& [c, name] : kNames) {
        if (c == code)
            return name;
    }
    return "Unknown";
}

std::optional<Errc> errc_from_string(std::string_view name) noexcept
{
    for (const auto& [c, n] : kNames) {
        if (n == name)
            return c;
    }
    return std::nullopt;
}

Error::Error(Errc code, const std::string& detail)
    : std::runtime_error(std::string(to_string(code)) + (detail.empty() ? "" : ": " + detail))
    , code_(code)
{}

} // namespace appshare
