#include "pegscope/remote.hpp"

#include <map>
#include <memory>
#include <mutex>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include "pegscope/error.hpp"
#include "pegscope/ingestion.hpp"

namespace pegscope {
namespace {

std::mutex& endpoint_mutex(const std::string& endpoint) {
    static std::mutex registry_mutex;
    static std::map<std::string, std::unique_ptr<std::mutex>> per_endpoint;
    std::lock_guard lock(registry_mutex);
    auto& slot = per_endpoint[endpoint];
    if (!slot) slot = std::make_unique<std::mutex>();
    return *slot;
}

struct SplitUrl {
    std::string origin;  // scheme://host[:port]
    std::string path_prefix;
};

SplitUrl split_endpoint(const std::string& endpoint) {
    const auto scheme_end = endpoint.find("://");
    if (scheme_end == std::string::npos) throw ConfigError("remote endpoint must be absolute: " + endpoint);
    const auto path_start = endpoint.find('/', scheme_end + 3);
    SplitUrl out;
    out.origin = endpoint.substr(0, path_start);
    if (path_start != std::string::npos) out.path_prefix = endpoint.substr(path_start);
    while (!out.path_prefix.empty() && out.path_prefix.back() == '/') out.path_prefix.pop_back();
    return out;
}

double usd_field(const Json& market_data, const char* group, const std::string& where) {
    auto g = market_data.find(group);
    if (g == market_data.end() || !g->is_object()) throw NotFoundError(where + ": response lacks market_data." + group);
    auto usd = g->find("usd");
    if (usd == g->end() || !usd->is_number()) throw NotFoundError(where + ": response lacks market_data." + group + ".usd");
    return usd->get<double>();
}

}  // namespace

MarketSnapshot snapshot_from_history(const AssetId& asset, Date date, const Json& response) {
    const std::string where = asset.symbol() + " " + date.iso();
    auto md = response.find("market_data");
    if (md == response.end() || !md->is_object()) {
        throw NotFoundError(where + ": remote has no market data for this day");
    }
    MarketSnapshot s;
    s.asset = asset;
    s.date = date;
    s.price_usd = usd_field(*md, "current_price", where);
    s.mcap_usd = usd_field(*md, "market_cap", where);
    s.volume_daily = usd_field(*md, "total_volume", where);
    s.volatility_daily = 0.0;
    s.validate();
    return s;
}

RemoteMarketClient::RemoteMarketClient(RemoteConfig config, Store& cache)
    : config_(std::move(config)), cache_(cache) {}

MarketSnapshot RemoteMarketClient::fetch(const AssetId& asset, Date date) {
    const RecordKey key = RecordKey::market(asset, date);
    if (auto cached = cache_.find_bytes(key)) return snapshot_from_json(Json::parse(*cached));

    if (!config_.allow_network) {
        throw ConfigError("network access is disabled; cannot fetch " + asset.symbol() + " " + date.iso());
    }
    const auto id = coingecko_id(asset);
    if (!id) throw NotFoundError("no remote id for asset " + asset.symbol());

    MarketSnapshot snapshot = snapshot_from_history(asset, date, request_history(asset, *id, date));
    cache_.put(key, snapshot_to_json(snapshot));
    return snapshot;
}

Json RemoteMarketClient::request_history(const AssetId& asset, const std::string& coin_id, Date date) {
    const auto url = split_endpoint(config_.endpoint);
    std::lock_guard lock(endpoint_mutex(config_.endpoint));

    httplib::Client client(url.origin);
    client.set_connection_timeout(config_.timeout_seconds);
    client.set_read_timeout(config_.timeout_seconds);
    const std::string path = url.path_prefix + "/coins/" + coin_id + "/history?date=" + date.dmy_dashed();
    ++requests_;
    auto res = client.Get(path);
    if (!res) {
        throw TransportError("request to " + url.origin + path + " failed: " + httplib::to_string(res.error()));
    }
    if (res->status == 404) throw NotFoundError("remote has no history for " + asset.symbol() + " " + date.iso());
    if (res->status != 200) {
        throw TransportError("remote returned HTTP " + std::to_string(res->status) + " for " + path);
    }
    try {
        return Json::parse(res->body);
    } catch (const Json::parse_error& e) {
        throw TransportError(std::string("remote returned invalid JSON: ") + e.what());
    }
}

}  // namespace pegscope
