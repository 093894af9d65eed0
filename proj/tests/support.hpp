// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <relep/planner.hpp>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace relep::testing
{

inline std::filesystem::path dataDir()
{
    return RELEP_DATA_DIR;
}

inline std::filesystem::path scenePath(const std::string& name)
{
    return dataDir() / "scenes" / (name + ".json");
}

inline std::string slurp(const std::filesystem::path& path)
{
    auto in = std::ifstream(path, std::ios::binary);
    auto buffer = std::stringstream {};
    buffer << in.rdbuf();
    return buffer.str();
}

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir
{
  public:
    TempDir()
    {
        static std::atomic<int> counter { 0 };
        _path = std::filesystem::temp_directory_path()
                / ("relep-test-" + std::to_string(std::random_device {}()) + "-" + std::to_string(counter++));
        std::filesystem::create_directories(_path);
    }
    ~TempDir()
    {
        auto ec = std::error_code {};
        std::filesystem::remove_all(_path, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    [[nodiscard]] const std::filesystem::path& path() const noexcept { return _path; }

  private:
    std::filesystem::path _path;
};

/// Replies with the given texts in order, repeating the last one.
class FixedBackend final: public Backend
{
  public:
    explicit FixedBackend(std::vector<std::string> replies): _replies(std::move(replies)) {}

    [[nodiscard]] std::string complete(const PlannerRequest& request) override
    {
        requests.push_back(request);
        auto const index = std::min(_next, _replies.size() - 1);
        ++_next;
        return _replies.at(index);
    }
    [[nodiscard]] BackendKind kind() const noexcept override { return BackendKind::ScriptedOracle; }
    [[nodiscard]] bool concurrentSafe() const noexcept override { return false; }

    std::vector<PlannerRequest> requests;

  private:
    std::vector<std::string> _replies;
    std::size_t _next = 0;
};

} // namespace relep::testing
