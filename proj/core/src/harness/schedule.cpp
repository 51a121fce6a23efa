#include "appshare/harness/schedule.hpp"

#include "appshare/error.hpp"
#include "appshare/wire/text.hpp"

#include <algorithm>
#include <fstream>
#include <json.hpp>
#include <random>
#include <sstream>

namespace appshare::harness {

using Json = nlohmann::json;

std::string_view to_string(ScheduledEvent::Kind k) noexcept
{
    switch (k) {
    case ScheduledEvent::Kind::Spawn: return "spawn";
    case ScheduledEvent::Kind::Focus: return "focus";
    case ScheduledEvent::Kind::Input: return "input";
    case ScheduledEvent::Kind::Close: return "close";
    }
    return "?";
}

namespace {

ScheduledEvent::Kind kind_from(const std::string& s)
{
    for (auto k : {ScheduledEvent::Kind::Spawn, ScheduledEvent::Kind::Focus, ScheduledEvent::Kind::Input,
                   ScheduledEvent::Kind::Close}) {
        if (to_string(k) == s)
            return k;
    }
    throw Error(Errc::ParseError, "unknown event kind '" + s + "'");
}

} // namespace

std::string schedule_to_json(const Schedule& s)
{
    Json j;
    j["mode"] = std::string(to_string(s.mode));
    j["quantum_ms"] = s.quantum_ms;
    j["service_ms"] = s.service_ms;
    j["clients"] = s.clients;
    j["events"] = Json::array();
    for (const auto& e : s.events)
        j["events"].push_back({{"at_ms", e.at_ms}, {"client", e.client}, {"kind", to_string(e.kind)}, {"arg", e.arg}});
    return j.dump(1) + "\n";
}

Schedule schedule_from_json(std::string_view text)
{
    try {
        const auto j = Json::parse(text);
        Schedule s;
        s.mode = parse_mode(j.at("mode").get<std::string>());
        s.quantum_ms = j.value("quantum_ms", std::int64_t{50});
        s.service_ms = j.value("service_ms", std::int64_t{0});
        s.clients = j.at("clients").get<std::size_t>();
        for (const auto& e : j.at("events")) {
            ScheduledEvent ev;
            ev.at_ms = e.at("at_ms").get<std::int64_t>();
            ev.client = e.at("client").get<std::size_t>();
            ev.kind = kind_from(e.at("kind").get<std::string>());
            ev.arg = e.value("arg", std::string{});
            if (ev.client >= s.clients)
                throw Error(Errc::ParseError, "event for client " + std::to_string(ev.client));
            s.events.push_back(std::move(ev));
        }
        std::stable_sort(s.events.begin(), s.events.end(),
                         [](const ScheduledEvent& a, const ScheduledEvent& b) { return a.at_ms < b.at_ms; });
        return s;
    } catch (const Json::exception& e) {
        throw Error(Errc::ParseError, e.what());
    } catch (const Error& e) {
        if (e.code() == Errc::ParseError)
            throw;
        throw Error(Errc::ParseError, e.what());
    }
}

Schedule load_schedule(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw Error(Errc::ParseError, "cannot open " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return schedule_from_json(ss.str());
}

Schedule random_schedule(std::uint64_t seed, const ScheduleShape& shape)
{
    std::mt19937_64 rng(seed);
    auto uniform = [&](std::int64_t lo, std::int64_t hi) { return std::uniform_int_distribution<std::int64_t>(lo, hi)(rng); };

    Schedule s;
    s.quantum_ms = shape.quantum_ms;
    s.clients = static_cast<std::size_t>(uniform(static_cast<std::int64_t>(shape.min_clients), static_cast<std::int64_t>(shape.max_clients)));

    std::vector<std::size_t> spawned(s.clients, 0);
    std::vector<std::size_t> inputs(s.clients, 0);
    for (std::size_t c = 0; c < s.clients; ++c)
        s.events.push_back({0, c, ScheduledEvent::Kind::Spawn, "app" + std::to_string(c) + "-0"});

    const std::size_t rest = shape.events > s.clients ? shape.events - s.clients : 0;
    std::vector<ScheduledEvent> later;
    for (std::size_t i = 0; i < rest; ++i) {
        ScheduledEvent e;
        e.at_ms = uniform(1, shape.horizon_ms);
        e.client = static_cast<std::size_t>(uniform(0, static_cast<std::int64_t>(s.clients) - 1));
        const auto roll = uniform(0, 99);
        if (roll < 8) {
            e.kind = ScheduledEvent::Kind::Spawn;
            e.arg = "app" + std::to_string(e.client) + "-" + std::to_string(++spawned[e.client]);
        } else if (roll < 18) {
            e.kind = ScheduledEvent::Kind::Focus;
            e.arg = std::to_string(uniform(0, 2));
        } else {
            e.kind = ScheduledEvent::Kind::Input;
            e.arg = "c" + std::to_string(e.client) + "-" + std::to_string(inputs[e.client]++);
        }
        later.push_back(std::move(e));
    }
    std::stable_sort(later.begin(), later.end(), [](const auto& a, const auto& b) { return a.at_ms < b.at_ms; });
    s.events.insert(s.events.end(), later.begin(), later.end());
    return s;
}

ReplayResult replay(const Schedule& s)
{
    SimConfig cfg;
    cfg.mode = s.mode;
    cfg.quantum = std::chrono::milliseconds(s.quantum_ms);
    cfg.service = std::chrono::milliseconds(s.service_ms);
    Simulation sim(cfg);

    for (std::size_t c = 0; c < s.clients; ++c)
        sim.add_client();

    std::vector<std::vector<WindowId>> windows(s.clients);
    auto refresh_windows = [&](std::size_t c) {
        windows[c].clear();
        for (const auto& [win, cmd] : sim.client(c).windows())
            windows[c].push_back(win);
    };

    std::size_t expected_updates = 0;
    for (const auto& e : s.events) {
        sim.advance_to(sim.epoch() + std::chrono::milliseconds(e.at_ms));
        switch (e.kind) {
        case ScheduledEvent::Kind::Spawn:
            sim.spawn(e.client, e.arg);
            break;
        case ScheduledEvent::Kind::Focus: {
            refresh_windows(e.client);
            const auto idx = wire::parse_uint(e.arg);
            if (idx && *idx < windows[e.client].size())
                sim.focus(e.client, windows[e.client][*idx]);
            break;
        }
        case ScheduledEvent::Kind::Input:
            if (sim.client_open(e.client) && sim.client(e.client).focused()) {
                sim.input(e.client, wire::InputKind::Key, e.arg);
                ++expected_updates;
            }
            break;
        case ScheduledEvent::Kind::Close:
            sim.close(e.client);
            break;
        }
    }

    auto updates = [&] {
        std::size_t n = 0;
        for (std::size_t c = 0; c < sim.client_count(); ++c)
            n += sim.client(c).update_log().size();
        return n;
    };

    ReplayResult r;
    const auto limit = std::chrono::milliseconds((s.quantum_ms + s.service_ms + 50) * static_cast<std::int64_t>(s.clients + 2) * 4 + 1000);
    r.drained = sim.run_until([&] { return updates() >= expected_updates; }, limit);
    r.transcript = sim.transcript().to_text();
    for (std::size_t c = 0; c < sim.client_count(); ++c) {
        std::string log;
        for (const auto& line : sim.client(c).update_log())
            log += line + "\n";
        r.session_logs.push_back(std::move(log));
    }
    if (s.mode == Mode::Brokered)
        r.validation = validate_transcript(sim.transcript());
    return r;
}

} // namespace appshare::harness
