#include "pegscope/asset.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <utility>

#include "pegscope/error.hpp"

namespace pegscope {
namespace {

// keyed by lowercase symbol
constexpr std::array<std::pair<std::string_view, std::string_view>, 2> kRegistry{{
    {"usdc", "usd-coin"},
    {"usdt", "tether"},
}};

}  // namespace

AssetId::AssetId(std::string_view symbol) {
    if (symbol.empty()) throw DomainError("asset symbol is empty");
    symbol_.reserve(symbol.size());
    for (char c : symbol) {
        if (!std::isalnum(static_cast<unsigned char>(c))) {
            throw DomainError("asset symbol '" + std::string(symbol) + "' is not alphanumeric");
        }
        symbol_.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
    }
}

std::string AssetId::lower() const {
    std::string out = symbol_;
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::optional<std::string> coingecko_id(const AssetId& asset) {
    const std::string key = asset.lower();
    for (const auto& [symbol, id] : kRegistry) {
        if (symbol == key) return std::string(id);
    }
    return std::nullopt;
}

bool is_supported(const AssetId& asset) { return coingecko_id(asset).has_value(); }

}  // namespace pegscope
