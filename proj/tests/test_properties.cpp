#include <gtest/gtest.h>

#include "pegscope/report.hpp"
#include "support/fixture_env.hpp"
#include "support/properties.hpp"

using namespace pegscope;
using namespace pegscope::testing;

namespace {
constexpr std::size_t kCases = 1000;

void expect_ok(const PropertyReport& r) {
    EXPECT_GE(r.cases, kCases) << r.name;
    EXPECT_TRUE(r.ok()) << r.name << ": " << r.failures << " failures; first: " << r.first_failure;
}
}  // namespace

TEST(Properties, SupplyGapIsZeroWhenCirculationMatches) { expect_ok(prop_supply_gap_zero(kCases, 11)); }
TEST(Properties, SupplyGapMatchesDefinition) { expect_ok(prop_gap_consistency(kCases, 12)); }
TEST(Properties, WindowMatchesBruteForce) { expect_ok(prop_window_bruteforce(kCases, 13)); }
TEST(Properties, CanonicalFormIsFixedPoint) { expect_ok(prop_canonical_fixed_point(kCases, 14)); }
TEST(Properties, RangeMatchesLinearScan) { expect_ok(prop_store_range_scan(kCases, 15)); }
TEST(Properties, ClassifierIsMonotone) { expect_ok(prop_classifier_monotonicity(kCases, 16)); }
TEST(Properties, RankingIsDeterministic) { expect_ok(prop_ranking_determinism(kCases, 17)); }
TEST(Properties, LabelIsWorstFinding) { expect_ok(prop_label_is_max(kCases, 18)); }
TEST(Properties, VolatilityIsScaleFree) { expect_ok(prop_volatility_scale_free(kCases, 19)); }
TEST(Properties, ExtractionRoundTrips) { expect_ok(prop_extraction_roundtrip(kCases, 20)); }

TEST(Properties, InterleavedCallsAreStateless) {
    Store store;
    cmd_ingest(store, fixture_ingest_options());
    expect_ok(prop_interleaving(store, kCases, 21));
}
