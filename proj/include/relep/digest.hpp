// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <string_view>

namespace relep
{

/// Lowercase hex SHA-256 of the bytes.
[[nodiscard]] std::string sha256Hex(std::string_view bytes);
[[nodiscard]] std::string base64Encode(std::string_view bytes);

} // namespace relep
