#include "appshare/cluster/peer_node.hpp"

#include "appshare/error.hpp"

namespace appshare::cluster {

PeerNode::PeerNode(PeerConfig cfg, apppool::AppPool pool, PeerNodeOptions options)
    : peer_(std::move(cfg))
    , pool_(std::move(pool))
    , options_(std::move(options))
{
    membership_ = join_group(peer_.config(), options_.network, [this](const std::string& src, wire::ClusterDatagram d) {
        enqueue([this, src, d = std::move(d)] {
            for (auto& action : peer_.handle_datagram(src, d, Clock::now())) {
                if (auto* c = std::get_if<Connect>(&action); c != nullptr && options_.on_connect)
                    options_.on_connect(c->directive);
            }
        });
    });
    thread_ = std::thread([this] { run(); });
}

PeerNode::~PeerNode()
{
    stop();
}

bool PeerNode::enqueue(std::function<void()> task)
{
    {
        std::lock_guard lock(mutex_);
        if (stopping_)
            return false;
        tasks_.push_back(std::move(task));
    }
    cv_.notify_one();
    return true;
}

template <typename F>
auto PeerNode::call(F&& fn) -> decltype(fn())
{
    using R = decltype(fn());
    auto promise = std::make_shared<std::promise<R>>();
    auto future = promise->get_future();
    const bool queued = enqueue([promise, fn = std::forward<F>(fn)]() mutable {
        try {
            if constexpr (std::is_void_v<R>) {
                fn();
                promise->set_value();
            } else {
                promise->set_value(fn());
            }
        } catch (...) {
            promise->set_exception(std::current_exception());
        }
    });
    if (!queued)
        throw Error(Errc::Timeout, "peer node is stopped");
    return future.get();
}

bool PeerNode::request(std::string app_name)
{
    return call([this, app_name = std::move(app_name)] { return peer_.submit_query(app_name, Clock::now()); });
}

void PeerNode::set_shared(std::string app_name, bool shared)
{
    call([this, app_name = std::move(app_name), shared] { pool_.set_shared(app_name, shared); });
}

std::vector<std::string> PeerNode::roster()
{
    return call([this] {
        std::vector<std::string> ids;
        for (const auto& [id, seen] : peer_.roster())
            ids.push_back(id);
        return ids;
    });
}

std::size_t PeerNode::pending_count()
{
    return call([this] { return peer_.pending().size(); });
}

std::size_t PeerNode::query_count()
{
    return call([this] { return peer_.queries().size(); });
}

void PeerNode::send_all(const std::vector<wire::ClusterDatagram>& out)
{
    for (const auto& d : out)
        membership_->send(d);
}

void PeerNode::run()
{
    while (true) {
        std::deque<std::function<void()>> batch;
        {
            std::unique_lock lock(mutex_);
            cv_.wait_for(lock, options_.tick, [this] { return stopping_ || !tasks_.empty(); });
            if (stopping_ && tasks_.empty())
                return;
            batch.swap(tasks_);
        }
        for (auto& task : batch)
            task();

        const auto now = Clock::now();
        send_all(peer_.tick_sender(now));
        const std::size_t active = options_.active_sessions ? options_.active_sessions() : 0;
        send_all(peer_.process_pending(pool_, active));
        peer_.expire_roster(now);
    }
}

void PeerNode::stop()
{
    {
        std::lock_guard lock(mutex_);
        if (stopping_)
            return;
        stopping_ = true;
    }
    cv_.notify_one();
    if (membership_)
        membership_->leave();
    if (thread_.joinable())
        thread_.join();
}

} // namespace appshare::cluster
