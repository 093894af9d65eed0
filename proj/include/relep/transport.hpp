// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <nlohmann/json.hpp>

#include <chrono>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace relep
{

enum class BackendErrorKind
{
    Timeout,
    HttpStatus,
    MalformedEnvelope,
    Connection,
    ScriptGap,
    CacheMiss,
};

[[nodiscard]] std::string_view toString(BackendErrorKind kind) noexcept;

class BackendError: public std::runtime_error
{
  public:
    BackendError(BackendErrorKind kind, const std::string& message);

    [[nodiscard]] BackendErrorKind kind() const noexcept { return _kind; }

  private:
    BackendErrorKind _kind;
};

/// POSTs a JSON document and returns the `text` field of the JSON reply.
/// Non-2xx responses, timeouts and envelopes without a string `text` raise BackendError.
class HttpTransport
{
  public:
    static constexpr auto DefaultTimeout = std::chrono::milliseconds(60'000);

    explicit HttpTransport(std::string url, std::chrono::milliseconds timeout = DefaultTimeout);

    [[nodiscard]] std::string post(const nlohmann::json& body) const;
    [[nodiscard]] const std::string& url() const noexcept { return _url; }
    [[nodiscard]] std::chrono::milliseconds timeout() const noexcept { return _timeout; }

  private:
    std::string _url;
    std::string _origin; // scheme://host:port
    std::string _path;
    std::chrono::milliseconds _timeout;
};

/// Content-addressed record/replay storage: `<dir>/<sha256(body)>.json` holding {request, text}.
class ReplayCache
{
  public:
    explicit ReplayCache(std::filesystem::path directory);

    [[nodiscard]] static std::string keyOf(std::string_view bodyText);
    [[nodiscard]] std::filesystem::path pathFor(std::string_view key) const;

    /// Writes atomically; re-recording an existing key overwrites it.
    void store(std::string_view bodyText, std::string_view responseText) const;
    [[nodiscard]] std::optional<std::string> lookup(std::string_view bodyText) const;

    [[nodiscard]] const std::filesystem::path& directory() const noexcept { return _directory; }

  private:
    std::filesystem::path _directory;
};

} // namespace relep
