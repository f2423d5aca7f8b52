#pragma once

#include <gtest/gtest.h>

#include <filesystem>
#include <string>

namespace fog_test {

// Fresh directory under the test temp root, removed on scope exit.
struct ScopedDir {
    std::filesystem::path path;

    explicit ScopedDir(const std::string& name)
        : path(std::filesystem::path(::testing::TempDir()) / name) {
        std::filesystem::remove_all(path);
        std::filesystem::create_directories(path);
    }
    ~ScopedDir() { std::filesystem::remove_all(path); }

    ScopedDir(const ScopedDir&) = delete;
    ScopedDir& operator=(const ScopedDir&) = delete;

    std::filesystem::path operator/(const std::string& leaf) const { return path / leaf; }
};

}  // namespace fog_test
