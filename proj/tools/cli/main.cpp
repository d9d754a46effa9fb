#include <atomic>
#include <chrono>
#include <csignal>
#include <iostream>
#include <stop_token>
#include <string>
#include <thread>
#include <vector>

#include "cli.hpp"

namespace {

std::atomic<bool> g_interrupted{false};

extern "C" void on_interrupt(int) { g_interrupted.store(true); }

}  // namespace

int main(int argc, char** argv) {
    std::signal(SIGINT, on_interrupt);
    std::signal(SIGTERM, on_interrupt);

    std::stop_source interrupt;
    // Signal handlers may only touch lock-free atomics; this thread turns the
    // flag into a stop request.
    std::jthread watcher([&interrupt](std::stop_token done) {
        while (!done.stop_requested()) {
            if (g_interrupted.load()) {
                interrupt.request_stop();
                return;
            }
            std::this_thread::sleep_for(std::chrono::milliseconds(20));
        }
    });

    std::vector<std::string> args(argv + 1, argv + argc);
    promptassist::cli::CliEnvironment io{std::cout, std::cerr, std::cin, {}, interrupt.get_token()};
    return promptassist::cli::run_cli(args, io);
}
