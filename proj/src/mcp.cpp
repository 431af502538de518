#include "pegscope/mcp.hpp"

#include <algorithm>
#include <istream>
#include <ostream>

#include "pegscope/error.hpp"
#include "pegscope/ingestion.hpp"

namespace pegscope::mcp {
namespace {

Json date_property(const char* description) {
    return Json{{"type", "string"}, {"format", "date"}, {"description", description}};
}

Json object_schema(Json properties, Json required) {
    return Json{{"type", "object"},
                {"properties", std::move(properties)},
                {"required", std::move(required)},
                {"additionalProperties", false}};
}

Json market_output_schema() {
    return object_schema(Json{{"asset", {{"type", "string"}}},
                              {"date", {{"type", "string"}, {"format", "date"}}},
                              {"price_usd", {{"type", "number"}}},
                              {"mcap_usd", {{"type", "number"}}},
                              {"volume_usd", {{"type", "number"}}},
                              {"volatility_daily", {{"type", "number"}}}},
                         Json{"asset", "date", "price_usd", "mcap_usd", "volume_usd", "volatility_daily"});
}

Json news_range_output_schema() {
    return Json{{"type", "array"},
                {"items", object_schema(Json{{"date", {{"type", "string"}, {"format", "date"}}},
                                             {"headline", {{"type", "string"}}},
                                             {"url", {{"type", "string"}, {"format", "uri"}}},
                                             {"summary", {{"type", "string"}}}},
                                        Json{"date", "headline", "url", "summary"})}};
}

ToolDescriptor market_tool(std::string_view name, const char* symbol) {
    return {std::string(name),
            std::string("Daily market snapshot for ") + symbol +
                ": price, market capitalization, traded volume and intraday volatility for one UTC day.",
            object_schema(Json{{"date", date_property("UTC calendar day, YYYY-MM-DD")}}, Json{"date"}),
            market_output_schema()};
}

ToolDescriptor news_tool(std::string_view name, const char* symbol) {
    return {std::string(name),
            std::string("Media coverage tagged ") + symbol +
                " published within [start, end], ascending by date, with a short summary per article.",
            object_schema(Json{{"start", date_property("first day, YYYY-MM-DD")},
                               {"end", date_property("last day, YYYY-MM-DD")}},
                          Json{"start", "end"}),
            news_range_output_schema()};
}

ToolResult tool_error(std::string message, Json detail = Json::object()) {
    detail["message"] = std::move(message);
    return {true, std::move(detail)};
}

const Json& require_args(const Json& arguments, std::initializer_list<const char*> keys) {
    if (!arguments.is_object()) throw ProtocolError(rpc::kInvalidParams, "arguments must be an object");
    for (const auto& [k, _] : arguments.items()) {
        if (std::find_if(keys.begin(), keys.end(), [&](const char* key) { return k == key; }) == keys.end()) {
            throw ProtocolError(rpc::kInvalidParams, "unexpected argument '" + k + "'");
        }
    }
    for (const char* key : keys) {
        auto it = arguments.find(key);
        if (it == arguments.end() || !it->is_string()) {
            throw ProtocolError(rpc::kInvalidParams, std::string("argument '") + key + "' must be a string");
        }
    }
    return arguments;
}

Date date_arg(const Json& arguments, const char* key) {
    try {
        return Date::parse_iso(arguments.at(key).get<std::string>());
    } catch (const DomainError& e) {
        throw ProtocolError(rpc::kInvalidParams, std::string("argument '") + key + "': " + e.what());
    }
}

Json error_object(int code, const std::string& message) { return Json{{"code", code}, {"message", message}}; }

std::string response(const Json& id, const char* member, Json body) {
    Json r{{"jsonrpc", "2.0"}, {"id", id}};
    r[member] = std::move(body);
    return canonical_dump(r);
}

}  // namespace

Json ToolDescriptor::to_json() const {
    return Json{{"name", name},
                {"description", description},
                {"inputSchema", input_schema},
                {"outputSchema", output_schema}};
}

const std::vector<ToolDescriptor>& tool_descriptors() {
    static const std::vector<ToolDescriptor> tools = [] {
        std::vector<ToolDescriptor> t;
        t.push_back(market_tool(kMarketUsdt, "USDT"));
        t.push_back(market_tool(kMarketUsdc, "USDC"));
        t.push_back(news_tool(kNewsUsdt, "USDT"));
        t.push_back(news_tool(kNewsUsdc, "USDC"));
        t.push_back({std::string(kNewsArticle),
                     "Full article by canonical URL (scheme and host are case-insensitive; fragments are ignored).",
                     object_schema(Json{{"url", {{"type", "string"}, {"format", "uri"}}}}, Json{"url"}),
                     object_schema(Json{{"url", {{"type", "string"}}},
                                        {"title", {{"type", "string"}}},
                                        {"published_date", {{"type", "string"}, {"format", "date"}}},
                                        {"body_text", {{"type", "string"}}}},
                                   Json{"url", "title", "published_date", "body_text"})});
        return t;
    }();
    return tools;
}

std::optional<std::string_view> market_tool_for(const AssetId& asset) {
    if (asset == AssetId::usdt()) return kMarketUsdt;
    if (asset == AssetId::usdc()) return kMarketUsdc;
    return std::nullopt;
}

std::optional<std::string_view> news_range_tool_for(const AssetId& asset) {
    if (asset == AssetId::usdt()) return kNewsUsdt;
    if (asset == AssetId::usdc()) return kNewsUsdc;
    return std::nullopt;
}

Json ToolResult::to_json() const { return Json{{"is_error", is_error}, {"content", content}}; }

Json ToolCallRecord::to_json(bool include_wall_time) const {
    Json j{{"seq", seq}, {"tool", tool}, {"arguments", Json::parse(arguments)}, {"result_digest", result_digest}};
    if (include_wall_time) {
        j["wall_time_ms"] =
            std::chrono::duration_cast<std::chrono::milliseconds>(wall_time.time_since_epoch()).count();
    }
    return j;
}

ToolServer::ToolServer(const Store& store) : store_(store) {}

void ToolServer::append_log(std::string_view tool, const Json& arguments, const std::string& result_bytes) {
    ToolCallRecord rec;
    rec.seq = log_.size() + 1;
    rec.tool = std::string(tool);
    rec.arguments = canonical_dump(arguments);
    rec.result_digest = sha256_hex(result_bytes);
    rec.wall_time = std::chrono::system_clock::now();
    log_.push_back(std::move(rec));
    if (sink_) sink_(log_.back());
}

ToolResult ToolServer::call(std::string_view tool, const Json& arguments) {
    try {
        ToolResult result = dispatch(tool, arguments);
        append_log(tool, arguments, canonical_dump(result.to_json()));
        return result;
    } catch (const ProtocolError& e) {
        append_log(tool, arguments, canonical_dump(error_object(e.code(), e.what())));
        throw;
    } catch (const std::exception& e) {
        append_log(tool, arguments, canonical_dump(error_object(rpc::kInternalError, e.what())));
        throw;
    }
}

ToolResult ToolServer::dispatch(std::string_view tool, const Json& arguments) {
    if (tool == kMarketUsdt || tool == kMarketUsdc) {
        const AssetId asset = tool == kMarketUsdt ? AssetId::usdt() : AssetId::usdc();
        require_args(arguments, {"date"});
        const Date date = date_arg(arguments, "date");
        auto bytes = store_.find_bytes(RecordKey::market(asset, date));
        if (!bytes) {
            return tool_error("snapshot not found", Json{{"asset", asset.symbol()}, {"date", date.iso()}});
        }
        const MarketSnapshot s = snapshot_from_json(Json::parse(*bytes));
        return {false, Json{{"asset", s.asset.symbol()},
                            {"date", s.date.iso()},
                            {"price_usd", s.price_usd},
                            {"mcap_usd", s.mcap_usd},
                            {"volume_usd", s.volume_daily},
                            {"volatility_daily", s.volatility_daily}}};
    }

    if (tool == kNewsUsdt || tool == kNewsUsdc) {
        const AssetId asset = tool == kNewsUsdt ? AssetId::usdt() : AssetId::usdc();
        require_args(arguments, {"start", "end"});
        const Date start = date_arg(arguments, "start");
        const Date end = date_arg(arguments, "end");
        if (start > end) {
            return tool_error("start is after end", Json{{"start", start.iso()}, {"end", end.iso()}});
        }
        std::vector<NewsItem> hits;
        for (const auto& [key, bytes] : store_.scan(Namespace::news)) {
            NewsItem item = news_from_json(Json::parse(bytes));
            if (item.tagged(asset) && item.published_date >= start && item.published_date <= end) {
                hits.push_back(std::move(item));
            }
        }
        std::sort(hits.begin(), hits.end(), [](const NewsItem& a, const NewsItem& b) {
            return std::tie(a.published_date, a.url) < std::tie(b.published_date, b.url);
        });
        Json items = Json::array();
        for (const auto& item : hits) {
            items.push_back(Json{{"date", item.published_date.iso()},
                                 {"headline", item.headline},
                                 {"url", item.url},
                                 {"summary", news_summary(item)}});
        }
        return {false, std::move(items)};
    }

    if (tool == kNewsArticle) {
        require_args(arguments, {"url"});
        std::string url;
        try {
            url = canonicalize_url(arguments.at("url").get<std::string>());
        } catch (const DomainError& e) {
            throw ProtocolError(rpc::kInvalidParams, std::string("argument 'url': ") + e.what());
        }
        auto bytes = store_.find_bytes(RecordKey::news(url));
        if (!bytes) return tool_error("article not found", Json{{"url", url}});
        const NewsItem item = news_from_json(Json::parse(*bytes));
        return {false, Json{{"url", item.url},
                            {"title", item.headline},
                            {"published_date", item.published_date.iso()},
                            {"body_text", item.body_text}}};
    }

    throw ProtocolError(rpc::kInvalidParams, "unknown tool '" + std::string(tool) + "'");
}

ToolResult ToolServer::read_attestation(const AssetId& asset, Date report_date) {
    const Json args{{"asset", asset.symbol()}, {"report_date", report_date.iso()}};
    ToolResult result;
    if (auto bytes = store_.find_bytes(RecordKey::attestation(asset, report_date))) {
        result = {false, Json::parse(*bytes)};
    } else {
        result = tool_error("attestation not found", args);
    }
    append_log(kAttestationDocument, args, canonical_dump(result.to_json()));
    return result;
}

Json ToolServer::handle_call(const Json& params) {
    if (!params.is_object()) {
        append_log("", Json(nullptr), canonical_dump(error_object(rpc::kInvalidParams, "params must be an object")));
        throw ProtocolError(rpc::kInvalidParams, "params must be an object");
    }
    auto name = params.find("name");
    if (name == params.end() || !name->is_string()) {
        append_log("", params.value("arguments", Json(nullptr)),
                   canonical_dump(error_object(rpc::kInvalidParams, "params.name must be a string")));
        throw ProtocolError(rpc::kInvalidParams, "params.name must be a string");
    }
    Json arguments = params.value("arguments", Json::object());
    return call(name->get<std::string>(), arguments).to_json();
}

std::optional<std::string> ToolServer::handle(std::string_view line) {
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) return std::nullopt;

    Json request = Json::parse(line, nullptr, false);
    if (request.is_discarded()) {
        return response(nullptr, "error", error_object(rpc::kParseError, "parse error"));
    }
    if (!request.is_object()) {
        return response(nullptr, "error", error_object(rpc::kInvalidRequest, "request must be an object"));
    }
    const bool notification = !request.contains("id");
    Json id = notification ? Json(nullptr) : request["id"];
    if (!id.is_null() && !id.is_string() && !id.is_number_integer()) {
        return response(nullptr, "error", error_object(rpc::kInvalidRequest, "id must be a string or integer"));
    }
    auto version = request.find("jsonrpc");
    auto method = request.find("method");
    if (version == request.end() || *version != "2.0" || method == request.end() || !method->is_string()) {
        return response(id, "error", error_object(rpc::kInvalidRequest, "invalid JSON-RPC 2.0 request"));
    }

    const std::string m = method->get<std::string>();
    const Json params = request.value("params", Json::object());
    Json result;
    try {
        if (m == "tools/list") {
            Json tools = Json::array();
            for (const auto& t : tool_descriptors()) tools.push_back(t.to_json());
            result = Json{{"tools", std::move(tools)}};
        } else if (m == "tools/call") {
            result = handle_call(params);
        } else if (m == "initialize") {
            result = Json{{"protocolVersion", "2024-11-05"},
                          {"serverInfo", {{"name", "pegscope"}, {"version", "0.1.0"}}},
                          {"capabilities", {{"tools", Json::object()}}}};
        } else if (m == "ping") {
            result = Json::object();
        } else if (m.rfind("notifications/", 0) == 0 && notification) {
            return std::nullopt;
        } else {
            throw ProtocolError(rpc::kMethodNotFound, "method not found: " + m);
        }
    } catch (const ProtocolError& e) {
        if (notification) return std::nullopt;
        return response(id, "error", error_object(e.code(), e.what()));
    } catch (const std::exception& e) {
        if (notification) return std::nullopt;
        return response(id, "error", error_object(rpc::kInternalError, e.what()));
    }
    if (notification) return std::nullopt;
    return response(id, "result", std::move(result));
}

void ToolServer::serve(std::istream& in, std::ostream& out) {
    std::string line;
    while (std::getline(in, line)) {
        if (auto reply = handle(line)) {
            out << *reply << '\n';
            out.flush();
        }
    }
}

}  // namespace pegscope::mcp
