#include "mindpres/digest.hpp"

#include <array>
#include <cstdint>
#include <cstring>

#include <openssl/sha.h>

#include "mindpres/rng.hpp"

namespace mindpres {

std::string sha256_hex(std::string_view data)
{
    std::array<unsigned char, SHA256_DIGEST_LENGTH> md{};
    SHA256(reinterpret_cast<const unsigned char*>(data.data()), data.size(), md.data());
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out;
    out.reserve(md.size() * 2);
    for (unsigned char b : md) {
        out.push_back(kHex[b >> 4]);
        out.push_back(kHex[b & 0xf]);
    }
    return out;
}

std::uint64_t derive_seed(std::uint64_t master, std::string_view label)
{
    std::string material = std::to_string(master);
    material.push_back(':');
    material.append(label);
    std::array<unsigned char, SHA256_DIGEST_LENGTH> md{};
    SHA256(reinterpret_cast<const unsigned char*>(material.data()), material.size(), md.data());
    std::uint64_t seed = 0;
    for (int i = 0; i < 8; ++i) seed = (seed << 8) | md[i];
    return seed;
}

}  // namespace mindpres
