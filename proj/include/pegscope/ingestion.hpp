#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pegscope/asset.hpp"
#include "pegscope/canonical.hpp"
#include "pegscope/date.hpp"
#include "pegscope/metrics.hpp"

namespace pegscope {

enum class MediaKind { text, structured, image_only };

const char* to_string(MediaKind kind) noexcept;

/// An issuer attestation as delivered. `structured` bodies hold one
/// attestation record object (same keys as the record file); `image_only`
/// documents carry no body.
struct DisclosureDocument {
    std::string source_id;
    AssetId asset{"USDT"};
    Date report_date;
    MediaKind media_kind = MediaKind::text;
    std::optional<std::string> body;
};

struct NewsItem {
    std::string url;  // canonical
    Date published_date;
    std::vector<AssetId> asset_tags;  // sorted, unique
    std::string headline;
    std::string body_text;

    bool tagged(const AssetId& asset) const;
    bool operator==(const NewsItem&) const = default;
};

// Market CSV ------------------------------------------------------------

inline constexpr std::string_view kMarketCsvHeader =
    "date,asset,price_usd,mcap_usd,volume_daily,volatility_daily";

std::vector<MarketSnapshot> parse_market_csv(std::string_view text);
std::vector<MarketSnapshot> load_market_csv(const std::filesystem::path& path);
std::string write_market_csv(std::span<const MarketSnapshot> snapshots);

// Attestation records ---------------------------------------------------

DisclosureExtract attestation_from_json(const Json& record);
Json attestation_to_json(const DisclosureExtract& extract);

std::vector<DisclosureExtract> parse_attestation_records(std::string_view text);
std::vector<DisclosureExtract> load_attestation_records(const std::filesystem::path& path);
std::string write_attestation_records(std::span<const DisclosureExtract> records);

// News corpus -----------------------------------------------------------

std::string canonicalize_url(std::string_view url);

NewsItem news_from_json(const Json& object);
Json news_to_json(const NewsItem& item);

std::vector<NewsItem> parse_news_jsonl(std::string_view text);
std::vector<NewsItem> load_news_jsonl(const std::filesystem::path& path);
std::string write_news_jsonl(std::span<const NewsItem> items);

inline constexpr std::size_t kSummaryChars = 400;

/// First 400 code points of the body (never splits a UTF-8 sequence).
std::string news_summary(const NewsItem& item);

// Market snapshot records ----------------------------------------------

Json snapshot_to_json(const MarketSnapshot& snapshot);
MarketSnapshot snapshot_from_json(const Json& object);

// Disclosure extraction ---------------------------------------------------

/// Turns a disclosure document into structured reserve figures.
///
/// Text bodies go through a line-oriented grammar: labeled monetary phrases
/// ("total assets", "total liabilities", "in circulation"/"circulating
/// supply", case-insensitive) bind to the next amount on the same line.
/// Amounts accept `$`, `US$` or `USD` prefixes, comma digit groups, a
/// decimal fraction and a unit word (thousand/million/billion/trillion,
/// bn/mn). Calendar dates are masked before matching. The first amount
/// bound to a label wins.
///
/// Image-only documents yield an extract with no figures.
/// Throws ExtractionError naming the first missing field.
DisclosureExtract extract_disclosure(const DisclosureDocument& doc);

/// Parses one amount phrase (e.g. "$82.42 billion", "82,190,000,000").
/// Exposed for tests; returns nullopt when the text holds no amount.
std::optional<double> parse_amount(std::string_view text);

std::string read_file(const std::filesystem::path& path);

}  // namespace pegscope
