#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pegscope/asset.hpp"
#include "pegscope/date.hpp"

namespace pegscope {

/// One day of observed market state for one asset.
struct MarketSnapshot {
    AssetId asset{"USDT"};
    Date date;
    double price_usd = 1.0;        // USD per token, > 0
    double mcap_usd = 0.0;         // USD, >= 0
    double volume_daily = 0.0;     // USD over the UTC day, >= 0
    double volatility_daily = 0.0; // percent, >= 0

    /// Throws DomainError when any numeric invariant is violated.
    void validate() const;

    bool operator==(const MarketSnapshot&) const = default;
};

struct MarketDerived {
    double turnover_ratio = 0.0;
    double peg_deviation_pct = 0.0;
};

/// Attested reserve figures. Present only for extractable documents.
struct ReserveFigures {
    double circulation_rep = 0.0;
    double asset_value = 0.0;
    double liability_value = 0.0;

    bool operator==(const ReserveFigures&) const = default;
};

struct DisclosureExtract {
    AssetId asset{"USDT"};
    Date report_date;
    std::optional<ReserveFigures> figures;  // absent <=> not extractable
    std::optional<std::string> auditor;
    std::string source_id;

    bool extractable() const { return figures.has_value(); }
    /// Throws DomainError on figure invariants (positivity, circulation
    /// not materially above liabilities).
    void validate() const;

    bool operator==(const DisclosureExtract&) const = default;
};

struct AlignmentMetrics {
    double coverage_ratio = 0.0;
    double implied_mcap = 0.0;
    double circulation_obs = 0.0;
    double supply_gap_pct = 0.0;
};

struct WindowAggregate {
    AssetId asset{"USDT"};
    Date center_date;
    int span_days = 0;
    double mean_price = 0.0;
    double min_price = 0.0;
    double max_price = 0.0;
    double max_abs_peg_dev_pct = 0.0;
    double mean_turnover = 0.0;
    double mcap_change = 0.0;  // latest present day minus earliest present day
    int days_present = 0;

    Date first_date() const { return center_date - span_days; }
    Date last_date() const { return center_date + span_days; }
};

double compute_turnover(double volume_daily, double mcap_usd);
/// Same as above; the error message names the snapshot's asset and date.
double compute_turnover(const MarketSnapshot& snapshot);
double compute_peg_deviation(double price_usd);
double compute_coverage(double asset_value, double liability_value);
double compute_implied_mcap(double circulation_rep, double price_usd);
double compute_supply_gap(double mcap_usd, double price_usd, double circulation_rep);

/// High-low range over low, in percent.
double estimate_volatility(std::span<const double> intraday_prices);

MarketDerived derive(const MarketSnapshot& snapshot);
AlignmentMetrics align(const ReserveFigures& figures, const MarketSnapshot& snapshot);

/// Aggregates the snapshots whose date lies within center +/- span_days.
/// Missing days are skipped, never interpolated.
WindowAggregate aggregate_window(std::span<const MarketSnapshot> snapshots, Date center_date,
                                 int span_days);

}  // namespace pegscope
