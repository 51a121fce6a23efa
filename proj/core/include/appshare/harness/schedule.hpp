#pragma once

#include "appshare/harness/simulation.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace appshare::harness {

struct ScheduledEvent
{
    enum class Kind { Spawn, Focus, Input, Close };

    std::int64_t at_ms = 0;
    std::size_t client = 0;
    Kind kind = Kind::Input;
    /// Spawn: command. Focus: index into the client's windows in spawn order.
    /// Input: payload.
    std::string arg;
};

std::string_view to_string(ScheduledEvent::Kind k) noexcept;

struct Schedule
{
    Mode mode = Mode::Brokered;
    std::int64_t quantum_ms = 50;
    std::int64_t service_ms = 0;
    std::size_t clients = 1;
    /// Sorted by at_ms; ties keep their listed order.
    std::vector<ScheduledEvent> events;
};

std::string schedule_to_json(const Schedule& s);
/// Throws Error{ParseError}.
Schedule schedule_from_json(std::string_view text);
Schedule load_schedule(const std::filesystem::path& path);

struct ScheduleShape
{
    std::size_t min_clients = 1;
    std::size_t max_clients = 6;
    std::size_t events = 100;
    std::int64_t horizon_ms = 2000;
    std::int64_t quantum_ms = 20;
};

/// Every client spawns first; later events are inputs with occasional
/// extra spawns and focus switches. Input payloads are unique.
Schedule random_schedule(std::uint64_t seed, const ScheduleShape& shape = {});

struct ReplayResult
{
    std::string transcript;
    std::vector<std::string> session_logs;
    ValidationResult validation;
    bool drained = false;
};

/// Plays the schedule through broker and host in a Simulation, then lets it
/// run until every input is answered (or a generous limit passes).
ReplayResult replay(const Schedule& s);

} // namespace appshare::harness
