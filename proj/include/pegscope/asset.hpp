#pragma once

#include <compare>
#include <optional>
#include <string>
#include <string_view>

namespace pegscope {

/// Stablecoin symbol, uppercase-normalized. Any non-empty alphanumeric
/// symbol is representable; `coingecko_id` knows the supported set.
class AssetId {
public:
    explicit AssetId(std::string_view symbol);

    static AssetId usdt() { return AssetId{"USDT"}; }
    static AssetId usdc() { return AssetId{"USDC"}; }

    const std::string& symbol() const { return symbol_; }
    std::string lower() const;

    auto operator<=>(const AssetId&) const = default;

private:
    std::string symbol_;
};

/// Remote market-data id for a supported asset (`tether`, `usd-coin`).
std::optional<std::string> coingecko_id(const AssetId& asset);

bool is_supported(const AssetId& asset);

}  // namespace pegscope
