#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace appshare::wire {

bool is_valid_utf8(std::string_view bytes) noexcept;

/// Strict dotted-quad IPv4 check (four decimal octets, no leading zeros).
bool is_ipv4(std::string_view text) noexcept;

/// Splits on every occurrence of `delim`; an empty input yields one empty piece.
std::vector<std::string_view> split(std::string_view text, std::string_view delim);

std::string to_hex(std::string_view bytes);

std::optional<std::uint64_t> parse_uint(std::string_view text) noexcept;

std::string_view trim(std::string_view text) noexcept;

} // namespace appshare::wire
