#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pegscope/canonical.hpp"
#include "pegscope/metrics.hpp"

namespace pegscope {

/// Rule thresholds. Loaded from a JSON object whose keys mirror the field
/// names; missing keys keep the frozen defaults below.
struct Thresholds {
    double coverage_abnormal = 1.0;
    double gap_suspicious = 1.0;
    double gap_abnormal = 3.0;
    double turnover_abnormal = 0.70;
    double turnover_suspicious = 0.45;
    double volatility_suspicious = 0.25;
    double peg_suspicious = 0.5;
    double peg_abnormal = 2.0;
    int staleness_days = 120;

    static Thresholds from_json(const Json& object);
    static Thresholds load(const std::filesystem::path& path);
    Json to_json() const;
    /// First 16 hex digits of the sha256 of the canonical JSON.
    std::string digest() const;
    void validate() const;

    bool operator==(const Thresholds&) const = default;
};

enum class Severity : int { normal = 0, suspicious = 1, abnormal = 2 };

enum class Indicator : int { coverage = 0, attestation_quality, supply_gap, liquidity_stress, peg_stress };

inline constexpr std::array<Indicator, 5> kAllIndicators{Indicator::coverage, Indicator::attestation_quality,
                                                         Indicator::supply_gap, Indicator::liquidity_stress,
                                                         Indicator::peg_stress};

const char* to_string(Severity s) noexcept;
const char* to_string(Indicator i) noexcept;
Severity severity_from_string(std::string_view s);

struct IndicatorFinding {
    Indicator indicator = Indicator::coverage;
    Severity severity = Severity::normal;
    double magnitude = 0.0;  // normalized exceedance of the highest crossed threshold
    int persistence_days = 0;
    std::string detail;

    Json to_json() const;
};

/// Market and disclosure context around one attestation.
struct EventContext {
    AssetId asset{"USDT"};
    Date report_date;
    WindowAggregate window;  // span_days = 3, centered on report_date
    MarketSnapshot report_day_snapshot;
    MarketDerived report_day_derived;
    std::vector<MarketSnapshot> days;         // present window days, ascending
    std::vector<std::uint64_t> call_refs;     // log seqs of the window calls
    std::uint64_t report_day_ref = 0;         // log seq of the report-day call
};

struct AnalysisOutcome {
    AssetId asset{"USDT"};
    Date report_date;
    Severity label = Severity::normal;
    std::vector<IndicatorFinding> findings;  // ranked
    int scope = 0;
    std::string justification;

    Json to_json() const;
};

/// Observations one rule needs for one day.
struct RuleInputs {
    double coverage_ratio = 1.0;
    int attestation_age_days = 0;
    double supply_gap_pct = 0.0;
    double turnover_ratio = 0.0;
    double volatility_daily = 0.0;
    double peg_deviation_pct = 0.0;
};

struct RuleEvaluation {
    Severity severity = Severity::normal;
    double magnitude = 0.0;
    std::string detail;
};

RuleEvaluation evaluate_rule(Indicator indicator, const RuleInputs& in, const Thresholds& t);

RuleInputs rule_inputs(const ReserveFigures& figures, const MarketSnapshot& day, int attestation_age_days);

/// Sorts by severity desc, magnitude desc, then indicator order.
void rank_findings(std::vector<IndicatorFinding>& findings);

struct ClassifyOptions {
    /// Reference date for attestation staleness; defaults to the report date.
    std::optional<Date> as_of;
};

/// Evaluates all five rules on report-day values; persistence counts the
/// window days on which the same rule fires. Throws DomainError for a
/// non-extractable extract.
AnalysisOutcome classify(const DisclosureExtract& extract, const EventContext& ctx, const Thresholds& t,
                         const ClassifyOptions& options = {});

/// Market-only rules (liquidity_stress, peg_stress) on one snapshot.
std::vector<IndicatorFinding> market_findings(const MarketSnapshot& day, const Thresholds& t);

/// Four-significant-digit rendering used in justifications and tables.
std::string sig4(double value);

}  // namespace pegscope
