#include "appshare/types.hpp"

#include "appshare/error.hpp"

#include <string>

namespace appshare {

std::string_view to_string(Mode mode) noexcept
{
    return mode == Mode::Brokered ? "brokered" : "direct";
}

Mode parse_mode(std::string_view text)
{
    if (text == "brokered")
        return Mode::Brokered;
    if (text == "direct")
        return Mode::Direct;
    throw Error(Errc::ConfigError, "mode must be brokered or direct, got '" + std::string(text) + "'");
}

} // namespace appshare
