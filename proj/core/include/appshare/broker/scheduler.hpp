#pragma once

#include "appshare/types.hpp"

#include <cstddef>
#include <optional>
#include <vector>

namespace appshare::broker {

/// Round-robin allocation over a circular order. New members join at the
/// tail; a removed member never appears again.
class RoundRobin
{
public:
    void add(SessionId id);
    void remove(SessionId id);

    /// Moves the allocation to the next member. Requires !empty().
    SessionId advance();

    std::optional<SessionId> allocated() const noexcept { return allocated_; }
    const std::vector<SessionId>& order() const noexcept { return order_; }
    bool empty() const noexcept { return order_.empty(); }
    std::size_t size() const noexcept { return order_.size(); }

private:
    std::vector<SessionId> order_;
    std::optional<SessionId> allocated_;
    std::size_t next_ = 0; ///< position of the next member to allocate
};

} // namespace appshare::broker
