#include "pegscope/canonical.hpp"

#include <openssl/evp.h>

#include <array>
#include <charconv>
#include <cmath>
#include <memory>

#include "pegscope/error.hpp"

namespace pegscope {
namespace {

void reject_non_finite(const Json& value) {
    switch (value.type()) {
        case Json::value_t::number_float:
            if (!std::isfinite(value.get<double>())) throw DomainError("non-finite number in JSON value");
            break;
        case Json::value_t::array:
        case Json::value_t::object:
            for (const auto& child : value) reject_non_finite(child);
            break;
        default:
            break;
    }
}

}  // namespace

std::string canonical_dump(const Json& value) {
    reject_non_finite(value);
    // nlohmann's default object type is an ordered std::map, so dump() emits
    // sorted keys; floats go through its shortest round-trip formatter.
    return value.dump(-1, ' ', false, Json::error_handler_t::strict);
}

Json canonicalize(const Json& value) { return Json::parse(canonical_dump(value)); }

Json parse_canonical(std::string_view bytes) {
    Json value;
    try {
        value = Json::parse(bytes);
    } catch (const Json::parse_error& e) {
        throw ParseError(std::string("invalid JSON: ") + e.what());
    }
    if (canonical_dump(value) != bytes) throw ParseError("JSON payload is not in canonical form");
    return value;
}

std::string sha256_hex(std::string_view bytes) {
    std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
    unsigned int length = 0;
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
    if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
        EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size()) != 1 ||
        EVP_DigestFinal_ex(ctx.get(), digest.data(), &length) != 1) {
        throw Error(ErrorKind::io, "sha256 digest failed");
    }
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out;
    out.reserve(length * 2);
    for (unsigned int i = 0; i < length; ++i) {
        out.push_back(kHex[digest[i] >> 4]);
        out.push_back(kHex[digest[i] & 0xf]);
    }
    return out;
}

std::string shortest_decimal(double value) {
    std::array<char, 64> buf{};
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
    if (ec != std::errc{}) throw DomainError("cannot format number");
    return std::string(buf.data(), ptr);
}

}  // namespace pegscope
