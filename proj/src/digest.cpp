// SPDX-License-Identifier: Apache-2.0
#include <relep/digest.hpp>

#include <openssl/evp.h>

#include <array>
#include <stdexcept>
#include <vector>

namespace relep
{

std::string sha256Hex(std::string_view bytes)
{
    auto digest = std::array<unsigned char, EVP_MAX_MD_SIZE> {};
    auto length = 0U;
    if (EVP_Digest(bytes.data(), bytes.size(), digest.data(), &length, EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("SHA-256 digest failed");

    static constexpr char Hex[] = "0123456789abcdef";
    auto out = std::string {};
    out.reserve(length * 2);
    for (auto i = 0U; i < length; ++i)
    {
        out += Hex[digest[i] >> 4];
        out += Hex[digest[i] & 0x0F];
    }
    return out;
}

std::string base64Encode(std::string_view bytes)
{
    auto out = std::vector<unsigned char>(4 * ((bytes.size() + 2) / 3) + 1);
    auto const written = EVP_EncodeBlock(out.data(), reinterpret_cast<const unsigned char*>(bytes.data()), static_cast<int>(bytes.size()));
    return std::string(reinterpret_cast<const char*>(out.data()), static_cast<std::size_t>(written));
}

} // namespace relep
