#include "pegscope/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "pegscope/error.hpp"

namespace pegscope {
namespace {

std::string describe(const MarketSnapshot& s) { return s.asset.symbol() + " " + s.date.iso(); }

void require_finite(double value, const char* what) {
    if (!std::isfinite(value)) throw DomainError(std::string(what) + " is not finite");
}

}  // namespace

void MarketSnapshot::validate() const {
    require_finite(price_usd, "price_usd");
    require_finite(mcap_usd, "mcap_usd");
    require_finite(volume_daily, "volume_daily");
    require_finite(volatility_daily, "volatility_daily");
    if (price_usd <= 0) throw DomainError("price_usd must be > 0 for " + describe(*this));
    if (mcap_usd < 0) throw DomainError("mcap_usd must be >= 0 for " + describe(*this));
    if (volume_daily < 0) throw DomainError("volume_daily must be >= 0 for " + describe(*this));
    if (volatility_daily < 0) {
        throw DomainError("volatility_daily must be >= 0 for " + describe(*this));
    }
}

void DisclosureExtract::validate() const {
    if (!figures) return;
    const auto& f = *figures;
    const std::string where = asset.symbol() + " " + report_date.iso();
    require_finite(f.circulation_rep, "circulation_rep");
    require_finite(f.asset_value, "asset_value");
    require_finite(f.liability_value, "liability_value");
    if (f.circulation_rep <= 0) throw DomainError("circulation_rep must be > 0 for " + where);
    if (f.asset_value < 0) throw DomainError("asset_value must be >= 0 for " + where);
    if (f.liability_value <= 0) throw DomainError("liability_value must be > 0 for " + where);
    if (f.circulation_rep > f.liability_value * 1.01) {
        throw DomainError("circulation_rep exceeds liability_value by more than 1% for " + where);
    }
}

double compute_turnover(double volume_daily, double mcap_usd) {
    if (!(mcap_usd > 0)) throw DomainError("turnover undefined: mcap_usd must be > 0");
    return volume_daily / mcap_usd;
}

double compute_turnover(const MarketSnapshot& snapshot) {
    if (!(snapshot.mcap_usd > 0)) {
        throw DomainError("turnover undefined: mcap_usd must be > 0 for " + describe(snapshot));
    }
    return snapshot.volume_daily / snapshot.mcap_usd;
}

double compute_peg_deviation(double price_usd) {
    if (!(price_usd > 0)) throw DomainError("peg deviation undefined: price_usd must be > 0");
    return 100.0 * (price_usd - 1.0);
}

double compute_coverage(double asset_value, double liability_value) {
    if (!(liability_value > 0)) throw DomainError("coverage undefined: liability_value must be > 0");
    return asset_value / liability_value;
}

double compute_implied_mcap(double circulation_rep, double price_usd) {
    if (!(circulation_rep > 0) || !(price_usd > 0)) {
        throw DomainError("implied mcap requires circulation_rep > 0 and price_usd > 0");
    }
    return circulation_rep * price_usd;
}

double compute_supply_gap(double mcap_usd, double price_usd, double circulation_rep) {
    if (!(price_usd > 0) || !(circulation_rep > 0)) {
        throw DomainError("supply gap requires price_usd > 0 and circulation_rep > 0");
    }
    // mcap == circulation_rep * price_usd gives exactly 0.
    const double implied = circulation_rep * price_usd;
    return 100.0 * (mcap_usd - implied) / implied;
}

double estimate_volatility(std::span<const double> intraday_prices) {
    if (intraday_prices.empty()) throw DomainError("volatility undefined for an empty price sequence");
    auto [lo, hi] = std::minmax_element(intraday_prices.begin(), intraday_prices.end());
    if (!(*lo > 0)) throw DomainError("volatility requires all prices > 0");
    return 100.0 * (*hi - *lo) / *lo;
}

MarketDerived derive(const MarketSnapshot& snapshot) {
    return {compute_turnover(snapshot), compute_peg_deviation(snapshot.price_usd)};
}

AlignmentMetrics align(const ReserveFigures& figures, const MarketSnapshot& snapshot) {
    AlignmentMetrics m;
    m.coverage_ratio = compute_coverage(figures.asset_value, figures.liability_value);
    m.implied_mcap = compute_implied_mcap(figures.circulation_rep, snapshot.price_usd);
    m.circulation_obs = snapshot.mcap_usd / snapshot.price_usd;
    m.supply_gap_pct = compute_supply_gap(snapshot.mcap_usd, snapshot.price_usd, figures.circulation_rep);
    return m;
}

WindowAggregate aggregate_window(std::span<const MarketSnapshot> snapshots, Date center_date,
                                 int span_days) {
    if (span_days < 0) throw DomainError("span_days must be >= 0");

    WindowAggregate agg;
    agg.center_date = center_date;
    agg.span_days = span_days;

    const Date lo = center_date - span_days;
    const Date hi = center_date + span_days;

    const MarketSnapshot* first = nullptr;
    const MarketSnapshot* last = nullptr;
    double price_sum = 0.0;
    double turnover_sum = 0.0;
    double min_price = std::numeric_limits<double>::infinity();
    double max_price = -std::numeric_limits<double>::infinity();

    for (const auto& s : snapshots) {
        if (s.asset != snapshots.front().asset) {
            throw DomainError("aggregate_window: snapshots mix assets " + snapshots.front().asset.symbol() +
                              " and " + s.asset.symbol());
        }
        if (s.date < lo || s.date > hi) continue;
        if (first == nullptr || s.date < first->date) first = &s;
        if (last == nullptr || s.date > last->date) last = &s;
        ++agg.days_present;
        price_sum += s.price_usd;
        turnover_sum += compute_turnover(s);
        min_price = std::min(min_price, s.price_usd);
        max_price = std::max(max_price, s.price_usd);
        agg.max_abs_peg_dev_pct =
            std::max(agg.max_abs_peg_dev_pct, std::abs(compute_peg_deviation(s.price_usd)));
    }

    if (agg.days_present == 0) {
        throw DomainError("no snapshot in window " + lo.iso() + ".." + hi.iso());
    }
    agg.asset = first->asset;
    agg.mean_price = price_sum / agg.days_present;
    agg.mean_turnover = turnover_sum / agg.days_present;
    agg.min_price = min_price;
    agg.max_price = max_price;
    agg.mcap_change = last->mcap_usd - first->mcap_usd;
    return agg;
}

}  // namespace pegscope
