#include <gtest/gtest.h>

#include "pegscope/agents.hpp"
#include "pegscope/classifier.hpp"
#include "pegscope/error.hpp"
#include "pegscope/report.hpp"
#include "support/fixture_env.hpp"
#include "support/oracles.hpp"
#include "support/properties.hpp"

using namespace pegscope;
using namespace pegscope::testing;

namespace {

class ClassifierTest : public ::testing::Test {
protected:
    static void SetUpTestSuite() {
        store_ = new Store();
        cmd_ingest(*store_, fixture_ingest_options());
    }
    static void TearDownTestSuite() {
        delete store_;
        store_ = nullptr;
    }
    static AnalysisOutcome run(const AssetId& asset, Date date) {
        RuleBackend backend;
        return run_pipeline(*store_, asset, date, backend, {false}).outcome;
    }
    static Store* store_;
};

Store* ClassifierTest::store_ = nullptr;

const IndicatorFinding& finding(const AnalysisOutcome& o, Indicator i) {
    for (const auto& f : o.findings) {
        if (f.indicator == i) return f;
    }
    throw std::logic_error("indicator missing");
}

}  // namespace

TEST_F(ClassifierTest, TerraWeekUsdtIsAbnormalThroughLiquidity) {
    const auto o = run(AssetId::usdt(), Date::from_ymd(2022, 5, 18));
    EXPECT_EQ(o.label, Severity::abnormal);
    ASSERT_FALSE(o.findings.empty());
    EXPECT_EQ(o.findings.front().indicator, Indicator::liquidity_stress);
    EXPECT_EQ(o.findings.front().severity, Severity::abnormal);
    EXPECT_EQ(o.scope, 1);
    EXPECT_NE(o.justification.find("turnover_ratio 0.7875 > turnover_abnormal 0.7"), std::string::npos)
        << o.justification;
}

TEST_F(ClassifierTest, QuietUsdcDayIsNormal) {
    const auto o = run(AssetId::usdc(), Date::from_ymd(2022, 2, 25));
    EXPECT_EQ(o.label, Severity::normal);
    EXPECT_EQ(o.scope, 0);
    for (const auto& f : o.findings) EXPECT_EQ(f.severity, Severity::normal);
    EXPECT_NE(o.justification.find("No indicator crossed"), std::string::npos);
}

TEST_F(ClassifierTest, UsdcSupplyGapIsSuspicious) {
    const auto o = run(AssetId::usdc(), Date::from_ymd(2023, 10, 30));
    EXPECT_EQ(o.label, Severity::suspicious);
    EXPECT_EQ(o.findings.front().indicator, Indicator::supply_gap);
    EXPECT_EQ(finding(o, Indicator::coverage).severity, Severity::normal);
}

TEST_F(ClassifierTest, LiquidityRanksFirstOnSuspiciousUsdtDay) {
    const auto o = run(AssetId::usdt(), Date::from_ymd(2022, 8, 10));
    EXPECT_EQ(o.label, Severity::suspicious);
    EXPECT_EQ(o.findings.front().indicator, Indicator::liquidity_stress);
    EXPECT_GE(o.findings.front().persistence_days, 1);
}

TEST_F(ClassifierTest, EveryPublishedLabelIsReproduced) {
    std::size_t rows = 0;
    for (const auto* table : {&published_usdt_rows(), &published_usdc_rows()}) {
        for (const auto& row : *table) {
            const auto o = run(AssetId(row.asset), Date::parse(row.date_dmy));
            EXPECT_STREQ(to_string(o.label), row.analysis_outcome) << row.asset << " " << row.date_dmy;
            ++rows;
        }
    }
    EXPECT_EQ(rows, 31u);
}

TEST_F(ClassifierTest, FindingsAreRankedAndCoverAllIndicators) {
    const auto o = run(AssetId::usdt(), Date::from_ymd(2022, 5, 18));
    ASSERT_EQ(o.findings.size(), kAllIndicators.size());
    auto copy = o.findings;
    rank_findings(copy);
    for (std::size_t i = 0; i < copy.size(); ++i) EXPECT_EQ(copy[i].indicator, o.findings[i].indicator);
}

TEST(Classifier, RuleBoundariesAreStrict) {
    const Thresholds t;
    RuleInputs in;
    in.coverage_ratio = 1.0;
    EXPECT_EQ(evaluate_rule(Indicator::coverage, in, t).severity, Severity::normal);
    in.coverage_ratio = 0.9999;
    EXPECT_EQ(evaluate_rule(Indicator::coverage, in, t).severity, Severity::abnormal);

    in.supply_gap_pct = -1.0;
    EXPECT_EQ(evaluate_rule(Indicator::supply_gap, in, t).severity, Severity::normal);
    in.supply_gap_pct = -1.01;
    EXPECT_EQ(evaluate_rule(Indicator::supply_gap, in, t).severity, Severity::suspicious);
    in.supply_gap_pct = 3.01;
    EXPECT_EQ(evaluate_rule(Indicator::supply_gap, in, t).severity, Severity::abnormal);

    in.turnover_ratio = 0.6;
    in.volatility_daily = 0.25;
    EXPECT_EQ(evaluate_rule(Indicator::liquidity_stress, in, t).severity, Severity::normal);
    in.volatility_daily = 0.26;
    EXPECT_EQ(evaluate_rule(Indicator::liquidity_stress, in, t).severity, Severity::suspicious);
    in.turnover_ratio = 0.71;
    in.volatility_daily = 0.0;
    EXPECT_EQ(evaluate_rule(Indicator::liquidity_stress, in, t).severity, Severity::abnormal);

    in.peg_deviation_pct = -0.5;
    EXPECT_EQ(evaluate_rule(Indicator::peg_stress, in, t).severity, Severity::normal);
    in.peg_deviation_pct = -11.0;
    EXPECT_EQ(evaluate_rule(Indicator::peg_stress, in, t).severity, Severity::abnormal);
}

TEST(Classifier, StalenessUsesAsOfDate) {
    const Thresholds t;
    RuleInputs in;
    in.attestation_age_days = 120;
    EXPECT_EQ(evaluate_rule(Indicator::attestation_quality, in, t).severity, Severity::normal);
    in.attestation_age_days = 121;
    const auto e = evaluate_rule(Indicator::attestation_quality, in, t);
    EXPECT_EQ(e.severity, Severity::abnormal);
    EXPECT_EQ(e.detail, "attestation age 121 days > staleness_days 120");

    Store store;
    cmd_ingest(store, fixture_ingest_options());
    const Date day = Date::from_ymd(2022, 2, 25);
    RuleBackend fresh;
    RuleBackend late(Thresholds{}, ClassifyOptions{day + 200});
    EXPECT_EQ(run_pipeline(store, AssetId::usdc(), day, fresh, {false}).outcome.label, Severity::normal);
    const auto stale = run_pipeline(store, AssetId::usdc(), day, late, {false}).outcome;
    EXPECT_EQ(stale.label, Severity::abnormal);
    EXPECT_EQ(stale.findings.front().indicator, Indicator::attestation_quality);
}

TEST(Classifier, NonExtractableIsRejected) {
    DisclosureExtract e;
    e.source_id = "stub";
    EXPECT_THROW(classify(e, EventContext{}, Thresholds{}), DomainError);
}

TEST(Thresholds, JsonConfiguration) {
    const auto t = Thresholds::from_json(Json{{"gap_suspicious", 1.5}});
    EXPECT_EQ(t.gap_suspicious, 1.5);
    EXPECT_EQ(t.gap_abnormal, 3.0);
    EXPECT_THROW(Thresholds::from_json(Json{{"gap_suspicous", 1.5}}), ConfigError);
    EXPECT_THROW(Thresholds::from_json(Json{{"gap_suspicious", "high"}}), ConfigError);
    EXPECT_THROW(Thresholds::from_json(Json{{"gap_suspicious", 4.0}}), ConfigError);
    EXPECT_THROW(Thresholds::from_json(Json{{"staleness_days", 1.5}}), ConfigError);
    EXPECT_THROW(Thresholds::from_json(Json::array()), ConfigError);
    EXPECT_EQ(Thresholds::from_json(Thresholds{}.to_json()), Thresholds{});
    EXPECT_EQ(Thresholds{}.digest().size(), 16u);
    EXPECT_NE(Thresholds{}.digest(), t.digest());
}

TEST(Thresholds, ShippedFileMatchesFrozenDefaults) {
    EXPECT_EQ(Thresholds::load(fixture_dir() / "thresholds.json"), Thresholds{});
}

TEST(Thresholds, FrozenValuesReproduceEveryPublishedLabel) {
    const auto rows = calibration_rows();
    ASSERT_EQ(rows.size(), 31u);
    for (const auto& row : rows) {
        EXPECT_EQ(oracle_label(row.inputs, Thresholds{}), row.expected) << row.asset << " " << row.date;
    }
    for (const auto& interval : calibration_sweep(rows, Thresholds{})) {
        EXPECT_TRUE(interval.frozen_reproduces) << interval.name;
        EXPECT_LE(interval.lo, interval.frozen) << interval.name;
        EXPECT_GE(interval.hi, interval.frozen) << interval.name;
    }
}

TEST(Classifier, Sig4) {
    EXPECT_EQ(sig4(0.78759), "0.7876");
    EXPECT_EQ(sig4(1.0), "1");
    EXPECT_EQ(sig4(8.227e10), "8.227e+10");
}
