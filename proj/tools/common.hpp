#pragma once

#include "appshare/error.hpp"

#include <CLI11.hpp>

#include <csignal>
#include <cstdio>
#include <functional>
#include <pthread.h>

namespace appshare::tools {

// Must run before any thread starts so that every thread inherits the mask
// and SIGINT/SIGTERM are only ever picked up by wait_for_signal().
inline void block_signals()
{
    sigset_t set;
    sigemptyset(&set);
    sigaddset(&set, SIGINT);
    sigaddset(&set, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &set, nullptr);
}

inline void wait_for_signal()
{
    sigset_t set;
    sigemptyset(&set);
    sigaddset(&set, SIGINT);
    sigaddset(&set, SIGTERM);
    int sig = 0;
    sigwait(&set, &sig);
}

/// Parses, runs the selected subcommand and maps errors to exit status 1.
inline int run(CLI::App& app, int argc, char** argv)
{
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }
    return 0;
}

inline std::function<void()> guarded(int& status, std::function<int()> body)
{
    return [&status, body = std::move(body)] {
        try {
            status = body();
        } catch (const Error& e) {
            std::fprintf(stderr, "error: %s\n", e.what());
            status = 1;
        } catch (const std::exception& e) {
            std::fprintf(stderr, "error: %s\n", e.what());
            status = 1;
        }
    };
}

} // namespace appshare::tools
