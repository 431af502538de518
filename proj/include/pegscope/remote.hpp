#pragma once

#include <atomic>
#include <string>

#include "pegscope/asset.hpp"
#include "pegscope/date.hpp"
#include "pegscope/metrics.hpp"
#include "pegscope/store.hpp"

namespace pegscope {

struct RemoteConfig {
    /// Base URL, e.g. `https://api.coingecko.com/api/v3` or `http://127.0.0.1:8080`.
    std::string endpoint;
    bool allow_network = false;
    int timeout_seconds = 20;
};

/// Maps a history-day response (`market_data.current_price.usd`,
/// `market_data.market_cap.usd`, `market_data.total_volume.usd`) onto a
/// snapshot. The day endpoint has no intraday range, so volatility is 0.
MarketSnapshot snapshot_from_history(const AssetId& asset, Date date, const Json& response);

/// Fixture-first client for the remote history endpoint. Every fetched
/// snapshot is written to the market namespace of `cache`; later calls for
/// the same (asset, date) are answered from the store without a request.
/// Requests to one endpoint are serialized.
class RemoteMarketClient {
public:
    RemoteMarketClient(RemoteConfig config, Store& cache);

    MarketSnapshot fetch(const AssetId& asset, Date date);

    std::size_t requests_made() const { return requests_.load(); }

private:
    Json request_history(const AssetId& asset, const std::string& coin_id, Date date);

    RemoteConfig config_;
    Store& cache_;
    std::atomic<std::size_t> requests_{0};
};

}  // namespace pegscope
