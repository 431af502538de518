#include <gtest/gtest.h>

#include "pegscope/error.hpp"
#include "pegscope/ingestion.hpp"
#include "support/generators.hpp"
#include "support/properties.hpp"

using namespace pegscope;
using namespace pegscope::testing;

namespace {

DisclosureDocument text_doc(std::string body) {
    return {"doc-1", AssetId::usdt(), Date::from_ymd(2022, 5, 18), MediaKind::text, std::move(body)};
}

}  // namespace

TEST(Extraction, LabeledSentence) {
    const auto e = extract_disclosure(text_doc(
        "Total assets: $82.42 billion. Total liabilities to token holders: $82.26 billion. Tokens in circulation: "
        "82,190,000,000."));
    ASSERT_TRUE(e.extractable());
    EXPECT_EQ(e.figures->asset_value, 8.242e10);
    EXPECT_EQ(e.figures->liability_value, 8.226e10);
    EXPECT_EQ(e.figures->circulation_rep, 8.219e10);
    EXPECT_EQ(e.source_id, "doc-1");
}

TEST(Extraction, MinimalUnitAmounts) {
    const auto e = extract_disclosure(text_doc("assets $1, liabilities $1, circulation 1"));
    EXPECT_EQ(e.figures->asset_value, 1.0);
    EXPECT_EQ(e.figures->liability_value, 1.0);
    EXPECT_EQ(e.figures->circulation_rep, 1.0);
}

TEST(Extraction, ImageOnlyIsNotExtractable) {
    DisclosureDocument doc{"stub", AssetId::usdc(), Date::from_ymd(2022, 6, 22), MediaKind::image_only, std::nullopt};
    const auto e = extract_disclosure(doc);
    EXPECT_FALSE(e.extractable());
    EXPECT_FALSE(e.figures.has_value());
}

TEST(Extraction, EmptyBodyNamesFirstMissingField) {
    try {
        extract_disclosure(text_doc(""));
        FAIL() << "expected ExtractionError";
    } catch (const ExtractionError& e) {
        EXPECT_EQ(e.field(), "circulation_rep");
    }
    try {
        extract_disclosure(text_doc("Circulating supply: 5 million\nTotal liabilities: 6 million"));
        FAIL() << "expected ExtractionError";
    } catch (const ExtractionError& e) {
        EXPECT_EQ(e.field(), "asset_value");
    }
}

TEST(Extraction, DatesAndPercentagesAreNotAmounts) {
    const auto e = extract_disclosure(text_doc(
        "Total assets as of 31 March 2023 increased 2.5% to US$ 1,234.56 million\n"
        "Total liabilities (2023-03-31): USD 1,200 million\n"
        "Circulating supply on March 31, 2023 of 1.1 bn\n"));
    EXPECT_EQ(e.figures->asset_value, 1234560000.0);
    EXPECT_EQ(e.figures->liability_value, 1.2e9);
    EXPECT_EQ(e.figures->circulation_rep, 1.1e9);
}

TEST(Extraction, FirstBindingWins) {
    const auto e = extract_disclosure(text_doc(
        "Total assets: 10\nTotal liabilities: 9\nIn circulation: 8\nTotal assets: 99\n"));
    EXPECT_EQ(e.figures->asset_value, 10.0);
}

TEST(Extraction, AuditorLine) {
    const auto e = extract_disclosure(text_doc("Prepared by: Example Assurance LLP\nassets 3\nliabilities 2\ncirculation 2\n"));
    EXPECT_EQ(e.auditor, "Example Assurance LLP");
}

TEST(Extraction, CirculationAboveLiabilitiesRejected) {
    EXPECT_THROW(extract_disclosure(text_doc("assets 5\nliabilities 5\ncirculation 6\n")), DomainError);
}

TEST(Extraction, StructuredBody) {
    DisclosureDocument doc{"s", AssetId::usdt(), Date::from_ymd(2022, 5, 18), MediaKind::structured,
                           R"({"asset":"USDT","report_date":"2022-05-18","source_id":"s","extractable":true,
                               "auditor":null,"circulation_rep":8.219e10,"asset_value":8.242e10,"liability_value":8.226e10})"};
    const auto e = extract_disclosure(doc);
    EXPECT_EQ(e.figures->asset_value, 8.242e10);
}

TEST(ParseAmount, Variants) {
    EXPECT_EQ(parse_amount("$82.42 billion"), 8.242e10);
    EXPECT_EQ(parse_amount("82,190,000,000"), 8.219e10);
    EXPECT_EQ(parse_amount("US$3.3bn"), 3.3e9);
    EXPECT_EQ(parse_amount("USD 7 thousand"), 7000.0);
    EXPECT_EQ(parse_amount("1.5 trillion"), 1.5e12);
    EXPECT_EQ(parse_amount("12.5 mn"), 12.5e6);
    EXPECT_EQ(parse_amount("0.1"), 0.1);
    EXPECT_FALSE(parse_amount("no digits here").has_value());
}

TEST(Extraction, RandomizedRoundTrip) {
    const auto report = prop_extraction_roundtrip(2000, 0x5eed01);
    EXPECT_TRUE(report.ok()) << report.failures << " failures; first: " << report.first_failure;
}

TEST(Extraction, GeneratorCoversVariants) {
    Gen g(7);
    bool unit = false, grouped = false, cents = false, prefixed = false;
    for (int i = 0; i < 500; ++i) {
        const auto a = render_amount(g);
        unit = unit || a.text.find("illion") != std::string::npos || a.text.find("bn") != std::string::npos;
        grouped = grouped || a.text.find(',') != std::string::npos;
        cents = cents || a.decimal.find('.') != std::string::npos;
        prefixed = prefixed || a.text.find('$') != std::string::npos || a.text.find("USD") != std::string::npos;
    }
    EXPECT_TRUE(unit && grouped && cents && prefixed);
}
