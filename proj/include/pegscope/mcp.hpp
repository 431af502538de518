#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "pegscope/asset.hpp"
#include "pegscope/canonical.hpp"
#include "pegscope/date.hpp"
#include "pegscope/store.hpp"

namespace pegscope::mcp {

inline constexpr std::string_view kMarketUsdt = "market.usdt_snapshot";
inline constexpr std::string_view kMarketUsdc = "market.usdc_snapshot";
inline constexpr std::string_view kNewsUsdt = "news.usdt_range";
inline constexpr std::string_view kNewsUsdc = "news.usdc_range";
inline constexpr std::string_view kNewsArticle = "news.article";

/// Internal document channel used by the disclosure agent. Logged like a
/// tool call but not registered, so it never appears in tools/list and
/// cannot be invoked over the wire.
inline constexpr std::string_view kAttestationDocument = "attestation.document";

namespace rpc {
inline constexpr int kParseError = -32700;
inline constexpr int kInvalidRequest = -32600;
inline constexpr int kMethodNotFound = -32601;
inline constexpr int kInvalidParams = -32602;
inline constexpr int kInternalError = -32603;
}  // namespace rpc

struct ToolDescriptor {
    std::string name;
    std::string description;
    Json input_schema;
    Json output_schema;

    Json to_json() const;
};

/// The five registered tools, in registration order.
const std::vector<ToolDescriptor>& tool_descriptors();

/// Market tool name for an asset (`market.usdt_snapshot` / `market.usdc_snapshot`).
std::optional<std::string_view> market_tool_for(const AssetId& asset);
std::optional<std::string_view> news_range_tool_for(const AssetId& asset);

struct ToolResult {
    bool is_error = false;
    Json content;

    Json to_json() const;
};

struct ToolCallRecord {
    std::uint64_t seq = 0;
    std::string tool;
    std::string arguments;      // canonical bytes
    std::string result_digest;  // sha256 of the canonical result bytes
    std::chrono::system_clock::time_point wall_time;

    /// `wall_time` is metadata and only included on request.
    Json to_json(bool include_wall_time = false) const;
};

/// A JSON-RPC level failure (bad envelope, unknown method, bad params).
class ProtocolError : public std::runtime_error {
public:
    ProtocolError(int code, const std::string& message) : std::runtime_error(message), code_(code) {}
    int code() const noexcept { return code_; }

private:
    int code_;
};

/// One protocol session over a shared, read-only view of the store.
/// Requests are handled strictly in arrival order; every tools/call (and
/// every internal document read) appends one ToolCallRecord.
class ToolServer {
public:
    explicit ToolServer(const Store& store);

    /// Dispatches a tool by name. Tool-level failures come back in-band
    /// (`is_error`); unknown tools and malformed arguments throw
    /// ProtocolError(kInvalidParams). Always logs exactly one record.
    ToolResult call(std::string_view tool, const Json& arguments);

    /// Attestation record for (asset, report_date) via the internal document channel.
    ToolResult read_attestation(const AssetId& asset, Date report_date);

    /// Handles one request line. Returns the canonical response line
    /// (without newline), or nullopt for notifications and blank lines.
    std::optional<std::string> handle(std::string_view line);

    /// Reads newline-delimited requests until EOF, writing one response per line.
    void serve(std::istream& in, std::ostream& out);

    const std::vector<ToolCallRecord>& log() const { return log_; }

    /// Invoked after every appended log record (e.g. to mirror it to a file).
    void on_log(std::function<void(const ToolCallRecord&)> sink) { sink_ = std::move(sink); }

private:
    ToolResult dispatch(std::string_view tool, const Json& arguments);
    void append_log(std::string_view tool, const Json& arguments, const std::string& result_bytes);
    Json handle_call(const Json& params);

    const Store& store_;
    std::vector<ToolCallRecord> log_;
    std::function<void(const ToolCallRecord&)> sink_;
};

}  // namespace pegscope::mcp
