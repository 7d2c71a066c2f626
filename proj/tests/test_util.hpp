#pragma once

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "error.hpp"

#ifndef WLMB_FIXTURE_DIR
#define WLMB_FIXTURE_DIR "."
#endif

namespace testutil {

inline std::string fixture_path(const std::string& name) {
    return std::string(WLMB_FIXTURE_DIR) + "/" + name;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE_MESSAGE(in.good(), "cannot open ", path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

inline std::string read_fixture(const std::string& name) {
    return read_file(fixture_path(name));
}

inline void write_file(const std::string& path, const std::string& content) {
    std::filesystem::create_directories(std::filesystem::path(path).parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << content;
}

// Error code raised by fn, or Err::ok when it returns normally.
template <typename Fn>
wlmbridge::Err error_code_of(Fn&& fn) {
    try {
        fn();
    } catch (const wlmbridge::WlmError& e) {
        return e.code();
    }
    return wlmbridge::Err::ok;
}

// Fresh scratch directory under the build tree, wiped on construction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        path_ = std::filesystem::temp_directory_path() /
                ("wlmbridge-test-" + tag + "-" + std::to_string(::getpid()));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    std::string str() const { return path_.string(); }
    std::filesystem::path path() const { return path_; }
    std::string sub(const std::string& name) const { return (path_ / name).string(); }

private:
    std::filesystem::path path_;
};

} // namespace testutil
