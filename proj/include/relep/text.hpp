// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <string_view>
#include <vector>

// Small string helpers shared across modules.
namespace relep
{

[[nodiscard]] std::string_view trim(std::string_view text) noexcept;
[[nodiscard]] std::string toLower(std::string_view text);
[[nodiscard]] std::vector<std::string_view> split(std::string_view text, char separator);
[[nodiscard]] std::vector<std::string> splitWhitespace(std::string_view text);
[[nodiscard]] bool iequals(std::string_view a, std::string_view b) noexcept;
[[nodiscard]] bool contains(std::string_view haystack, std::string_view needle) noexcept;

template <typename Range>
[[nodiscard]] std::string join(const Range& items, std::string_view separator)
{
    auto out = std::string {};
    auto first = true;
    for (auto const& item: items)
    {
        if (!first)
            out += separator;
        out += item;
        first = false;
    }
    return out;
}

} // namespace relep
