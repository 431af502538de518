#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "pegscope/agents.hpp"
#include "pegscope/classifier.hpp"
#include "pegscope/remote.hpp"
#include "pegscope/store.hpp"

namespace pegscope {

/// One table line: every market, disclosure and derived variable for an
/// (asset, report_date), plus the analysis label.
struct ReportRow {
    AssetId asset{"USDT"};
    Date report_date;
    double price_usd = 0.0;
    double mcap_usd = 0.0;
    double volume_daily = 0.0;
    double turnover_ratio = 0.0;
    double peg_deviation_pct = 0.0;
    double volatility_daily = 0.0;
    double circulation_rep = 0.0;
    double asset_value = 0.0;
    double liability_value = 0.0;
    double coverage_ratio = 0.0;
    double implied_mcap = 0.0;
    double supply_gap_pct = 0.0;
    Severity analysis_outcome = Severity::normal;
};

inline constexpr std::string_view kReportCsvHeader =
    "report_date,price_usd,mcap_usd,volume_daily,turnover_ratio,peg_deviation_pct,volatility_daily,"
    "circulation_rep,asset_value,liability_value,coverage_ratio,implied_mcap,supply_gap_pct,analysis_outcome";

ReportRow make_report_row(const PipelineResult& result);

/// Full-precision CSV (shortest round-trip decimals).
std::string render_report_csv(std::span<const ReportRow> rows);
/// Aligned table in 4-significant-digit scientific notation.
std::string render_report_text(std::span<const ReportRow> rows);

struct SkippedRow {
    AssetId asset{"USDT"};
    Date report_date;
    std::string stage;
    std::string kind;
    std::string reason;
};

std::string render_skipped_csv(std::span<const SkippedRow> skipped);

// ingest ------------------------------------------------------------------

struct IngestOptions {
    std::vector<std::filesystem::path> market;
    std::vector<std::filesystem::path> attestations;
    std::vector<std::filesystem::path> news;
    std::vector<std::pair<AssetId, Date>> fetch;
    RemoteConfig remote;
};

struct NamespaceCount {
    Namespace ns = Namespace::market;
    std::size_t inserted = 0;
    std::size_t unchanged = 0;
    std::size_t total = 0;  // records in the store afterwards
};

struct IngestSummary {
    std::vector<NamespaceCount> counts;  // market, attestation, news
    std::size_t extractable_attestations = 0;
    std::size_t image_only_attestations = 0;

    const NamespaceCount& count(Namespace ns) const;
    std::string render() const;
};

/// Parses every input first (errors name file and line), then writes.
IngestSummary cmd_ingest(Store& store, const IngestOptions& options);

// analyze -----------------------------------------------------------------

struct AnalyzeOptions {
    std::optional<AssetId> asset;
    Thresholds thresholds;
    std::optional<Date> as_of;
    unsigned jobs = 1;
    /// Write outcome and trace records back to the store.
    bool persist = true;
};

struct AssetReport {
    AssetId asset{"USDT"};
    std::vector<ReportRow> rows;  // ascending report_date
};

struct AnalyzeReport {
    std::vector<AssetReport> assets;  // ascending symbol
    std::vector<SkippedRow> skipped;  // ascending (asset, report_date)

    std::size_t row_count() const;
};

/// Runs the pipeline for every stored attestation of the selected asset(s).
/// Per-row failures land in `skipped`; the batch always completes.
AnalyzeReport cmd_analyze(Store& store, const AnalyzeOptions& options);

/// Writes report_<ASSET>.csv, report_<ASSET>.txt, skipped.csv and the
/// run_metadata.json sidecar (the only file carrying timestamps).
std::vector<std::filesystem::path> write_analyze_outputs(const AnalyzeReport& report,
                                                         const std::filesystem::path& out_dir,
                                                         const Thresholds& thresholds);

// event-study -----------------------------------------------------------

struct EventDay {
    MarketSnapshot snapshot;
    MarketDerived derived;
    std::vector<IndicatorFinding> findings;  // liquidity_stress, peg_stress
    std::uint64_t call_ref = 0;
};

struct EventNews {
    Date date;
    std::string headline;
    std::string url;
    std::string summary;
};

struct EventStudyReport {
    AssetId asset{"USDT"};
    Date center;
    int span_days = 0;
    WindowAggregate window;
    std::vector<EventDay> days;
    std::vector<EventNews> news;
    std::vector<mcp::ToolCallRecord> calls;

    /// Highest severity of `indicator` over the window days.
    Severity peak(Indicator indicator) const;
    Json to_json() const;
    std::string render_text() const;
};

/// Market and news context for [center - span, center + span], read through
/// the tool server. Throws ContextError when the center day is missing.
EventStudyReport cmd_event_study(const Store& store, const AssetId& asset, Date center, int span_days,
                                 const Thresholds& thresholds);

// export-figures ----------------------------------------------------------

inline constexpr std::string_view kFig2File = "fig2_market_liquidity.csv";
inline constexpr std::string_view kFig3File = "fig3_coverage.csv";
inline constexpr std::string_view kFig4File = "fig4_turnover_peg.csv";

inline constexpr std::string_view kFig2Header = "asset,report_date,mcap_usd,volume_daily,turnover_ratio";
inline constexpr std::string_view kFig3Header =
    "asset,report_date,coverage_ratio,circulation_rep,asset_value,liability_value";
inline constexpr std::string_view kFig4Header = "asset,report_date,turnover_ratio,peg_deviation_pct,volatility_daily";

/// Figure series from analyze rows (same values, full precision).
std::vector<std::filesystem::path> cmd_export_figures(const AnalyzeReport& report,
                                                      const std::filesystem::path& out_dir);

void write_text_file(const std::filesystem::path& path, std::string_view content);

}  // namespace pegscope
