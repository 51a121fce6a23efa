#include "appshare/broker/scheduler.hpp"

#include <algorithm>
#include <cassert>

namespace appshare::broker {

void RoundRobin::add(SessionId id)
{
    if (std::find(order_.begin(), order_.end(), id) != order_.end())
        return;
    // If the allocation wrapped from the old tail, the new tail comes next.
    const bool after_tail = allocated_ && !order_.empty() && *allocated_ == order_.back() && next_ == 0;
    order_.push_back(id);
    if (after_tail)
        next_ = order_.size() - 1;
}

void RoundRobin::remove(SessionId id)
{
    const auto it = std::find(order_.begin(), order_.end(), id);
    if (it == order_.end())
        return;
    const auto pos = static_cast<std::size_t>(it - order_.begin());
    order_.erase(it);
    if (pos < next_)
        --next_;
    if (next_ >= order_.size())
        next_ = 0;
    if (allocated_ == id)
        allocated_.reset();
}

SessionId RoundRobin::advance()
{
    assert(!order_.empty());
    const auto id = order_[next_];
    allocated_ = id;
    next_ = (next_ + 1) % order_.size();
    return id;
}

} // namespace appshare::broker
