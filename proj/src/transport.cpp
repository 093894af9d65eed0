// SPDX-License-Identifier: Apache-2.0
#include <relep/digest.hpp>
#include <relep/transport.hpp>

#include <fmt/format.h>
#include <httplib.h>

#include <atomic>
#include <fstream>
#include <sstream>
#include <thread>

namespace relep
{

std::string_view toString(BackendErrorKind kind) noexcept
{
    switch (kind)
    {
        case BackendErrorKind::Timeout: return "timeout";
        case BackendErrorKind::HttpStatus: return "http-status";
        case BackendErrorKind::MalformedEnvelope: return "malformed-envelope";
        case BackendErrorKind::Connection: return "connection";
        case BackendErrorKind::ScriptGap: return "script-gap";
        case BackendErrorKind::CacheMiss: return "cache-miss";
    }
    return "connection";
}

BackendError::BackendError(BackendErrorKind kind, const std::string& message):
    std::runtime_error(fmt::format("{}: {}", toString(kind), message)), _kind(kind)
{
}

HttpTransport::HttpTransport(std::string url, std::chrono::milliseconds timeout):
    _url(std::move(url)), _timeout(timeout)
{
    auto const scheme = _url.find("://");
    if (scheme == std::string::npos)
        throw std::invalid_argument(fmt::format("remote URL '{}' lacks a scheme", _url));
    auto const slash = _url.find('/', scheme + 3);
    _origin = slash == std::string::npos ? _url : _url.substr(0, slash);
    _path = slash == std::string::npos ? std::string("/") : _url.substr(slash);
}

std::string HttpTransport::post(const nlohmann::json& body) const
{
    auto client = httplib::Client(_origin);
    auto const seconds = static_cast<time_t>(_timeout.count() / 1000);
    auto const micros = static_cast<time_t>((_timeout.count() % 1000) * 1000);
    client.set_connection_timeout(seconds, micros);
    client.set_read_timeout(seconds, micros);
    client.set_write_timeout(seconds, micros);

    auto const started = std::chrono::steady_clock::now();
    auto result = client.Post(_path, body.dump(), "application/json");
    if (!result)
    {
        auto const error = result.error();
        auto const elapsed = std::chrono::steady_clock::now() - started;
        if (error == httplib::Error::ConnectionTimeout || (error == httplib::Error::Read && elapsed >= _timeout))
            throw BackendError(BackendErrorKind::Timeout, fmt::format("{} did not answer within {} ms", _url, _timeout.count()));
        throw BackendError(BackendErrorKind::Connection, fmt::format("{}: {}", _url, httplib::to_string(error)));
    }
    if (result->status < 200 || result->status >= 300)
        throw BackendError(BackendErrorKind::HttpStatus, fmt::format("{} answered HTTP {}", _url, result->status));

    auto reply = nlohmann::json::parse(result->body, nullptr, false);
    if (reply.is_discarded() || !reply.is_object() || !reply.contains("text") || !reply["text"].is_string())
        throw BackendError(BackendErrorKind::MalformedEnvelope, fmt::format("{} replied without a string 'text' field", _url));
    return reply["text"].get<std::string>();
}

ReplayCache::ReplayCache(std::filesystem::path directory): _directory(std::move(directory))
{
}

std::string ReplayCache::keyOf(std::string_view bodyText)
{
    return sha256Hex(bodyText);
}

std::filesystem::path ReplayCache::pathFor(std::string_view key) const
{
    return _directory / (std::string(key) + ".json");
}

void ReplayCache::store(std::string_view bodyText, std::string_view responseText) const
{
    static auto counter = std::atomic<unsigned> { 0 };
    std::filesystem::create_directories(_directory);
    auto const key = keyOf(bodyText);
    auto const target = pathFor(key);
    auto const temp = _directory
                      / fmt::format(".{}.{}.{}.tmp",
                                    key,
                                    std::hash<std::thread::id> {}(std::this_thread::get_id()),
                                    counter.fetch_add(1));
    {
        auto out = std::ofstream(temp, std::ios::binary | std::ios::trunc);
        auto const entry = nlohmann::json {
            { "request", std::string(bodyText) },
            { "text", std::string(responseText) },
        };
        out << entry.dump(2) << '\n';
        if (!out)
            throw std::runtime_error(fmt::format("cannot write replay entry '{}'", temp.string()));
    }
    std::filesystem::rename(temp, target);
}

std::optional<std::string> ReplayCache::lookup(std::string_view bodyText) const
{
    auto in = std::ifstream(pathFor(keyOf(bodyText)), std::ios::binary);
    if (!in)
        return std::nullopt;
    auto entry = nlohmann::json::parse(in, nullptr, false);
    if (entry.is_discarded() || !entry.contains("text") || !entry["text"].is_string())
        return std::nullopt;
    if (entry.value("request", std::string {}) != bodyText)
        return std::nullopt;
    return entry["text"].get<std::string>();
}

} // namespace relep
