#pragma once

#include <atomic>
#include <filesystem>
#include <fstream>
#include <memory>
#include <random>
#include <sstream>
#include <string>

#include "promptassist/wizard.hpp"

#ifndef PROMPTASSIST_SOURCE_DIR
#error "tests need PROMPTASSIST_SOURCE_DIR"
#endif

namespace promptassist::testing {

inline std::filesystem::path source_path(const std::string& relative) {
    return std::filesystem::path(PROMPTASSIST_SOURCE_DIR) / relative;
}

inline std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
}

/// A fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    TempDir() {
        static std::atomic<unsigned> counter{0};
        std::random_device rd;
        path_ = std::filesystem::temp_directory_path() /
                ("promptassist-test-" + std::to_string(rd()) + "-" + std::to_string(counter++));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    [[nodiscard]] const std::filesystem::path& path() const { return path_; }
    [[nodiscard]] std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

/// Clock ticking 1 ms per call from a fixed epoch, and sequential ids, so two
/// runs produce identical sessions.
inline WizardOptions deterministic_options(Timestamp epoch = 1'700'000'000'000) {
    auto now = std::make_shared<std::atomic<Timestamp>>(epoch);
    auto next_id = std::make_shared<std::atomic<int>>(0);
    WizardOptions o;
    o.clock = [now] { return now->fetch_add(1); };
    o.id_source = [next_id] { return "session-" + std::to_string(next_id->fetch_add(1)); };
    return o;
}

}  // namespace promptassist::testing
