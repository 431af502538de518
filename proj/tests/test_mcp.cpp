#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "pegscope/classifier.hpp"
#include "pegscope/error.hpp"
#include "pegscope/ingestion.hpp"
#include "pegscope/mcp.hpp"
#include "pegscope/report.hpp"
#include "support/fixture_env.hpp"
#include "support/properties.hpp"

using namespace pegscope;
using namespace pegscope::testing;

namespace {

class McpTest : public ::testing::Test {
protected:
    static void SetUpTestSuite() {
        store_ = new Store();
        cmd_ingest(*store_, fixture_ingest_options());
    }
    static void TearDownTestSuite() {
        delete store_;
        store_ = nullptr;
    }
    static Store* store_;
};

Store* McpTest::store_ = nullptr;

Json rpc(mcp::ToolServer& server, const std::string& line) {
    const auto reply = server.handle(line);
    EXPECT_TRUE(reply.has_value()) << line;
    return Json::parse(reply.value_or("null"));
}

std::string call_line(const std::string& tool, const Json& args, int id = 1) {
    return canonical_dump(Json{{"jsonrpc", "2.0"},
                               {"id", id},
                               {"method", "tools/call"},
                               {"params", {{"name", tool}, {"arguments", args}}}});
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
    std::ifstream in(path);
    std::vector<std::string> lines;
    for (std::string line; std::getline(in, line);) lines.push_back(line);
    return lines;
}

}  // namespace

TEST_F(McpTest, ToolsListHasFiveTools) {
    mcp::ToolServer server(*store_);
    const Json r = rpc(server, R"({"jsonrpc":"2.0","id":1,"method":"tools/list"})");
    const auto& tools = r.at("result").at("tools");
    ASSERT_EQ(tools.size(), 5u);
    int market = 0, textual = 0;
    for (const auto& t : tools) {
        const auto name = t.at("name").get<std::string>();
        (name.rfind("market.", 0) == 0 ? market : textual)++;
        EXPECT_TRUE(t.contains("inputSchema") || t.contains("input_schema")) << t.dump();
    }
    EXPECT_EQ(market, 2);
    EXPECT_EQ(textual, 3);
    mcp::ToolServer other(*store_);
    EXPECT_EQ(server.handle(R"({"jsonrpc":"2.0","id":1,"method":"tools/list"})"),
              other.handle(R"({"jsonrpc":"2.0","id":1,"method":"tools/list"})"));
    EXPECT_TRUE(server.log().empty());
}

TEST_F(McpTest, MarketSnapshots) {
    mcp::ToolServer server(*store_);
    const auto usdt = server.call(mcp::kMarketUsdt, Json{{"date", "2022-05-18"}});
    ASSERT_FALSE(usdt.is_error);
    EXPECT_EQ(usdt.content.at("asset"), "USDT");
    EXPECT_EQ(sig4(usdt.content.at("price_usd").get<double>()), "0.9996");
    EXPECT_EQ(usdt.content.at("mcap_usd").get<double>(), 8.227e10);
    EXPECT_EQ(usdt.content.at("volume_usd").get<double>(), 6.479e10);

    const auto usdc = server.call(mcp::kMarketUsdc, Json{{"date", "2022-02-25"}});
    ASSERT_FALSE(usdc.is_error);
    EXPECT_EQ(sig4(usdc.content.at("price_usd").get<double>()), "1.001");
    EXPECT_EQ(usdc.content.at("mcap_usd").get<double>(), 4.979e10);

    const auto absent = server.call(mcp::kMarketUsdt, Json{{"date", "2019-01-01"}});
    EXPECT_TRUE(absent.is_error);
    EXPECT_EQ(absent.content.at("message"), "snapshot not found");
    EXPECT_TRUE(server.call(mcp::kMarketUsdc, Json{{"date", "2019-01-01"}}).is_error);

    const std::string line = call_line("market.usdc_snapshot", Json{{"date", "2022-02-25"}});
    EXPECT_EQ(server.handle(line), server.handle(line));
    EXPECT_EQ(server.log().size(), 6u);
}

TEST_F(McpTest, NewsRanges) {
    mcp::ToolServer server(*store_);
    const auto terra = server.call(mcp::kNewsUsdt, Json{{"start", "2022-05-07"}, {"end", "2022-05-13"}});
    ASSERT_FALSE(terra.is_error);
    bool assurance = false;
    for (const auto& item : terra.content) {
        assurance = assurance || item.at("url") == "https://news.example.org/2022/05/13/tether-assurance-update";
    }
    EXPECT_TRUE(assurance);
    EXPECT_EQ(terra.content.size(), 3u);

    const auto svb = server.call(mcp::kNewsUsdc, Json{{"start", "2023-03-10"}, {"end", "2023-03-13"}});
    ASSERT_EQ(svb.content.size(), 3u);
    EXPECT_EQ(svb.content[0].at("url"), "https://news.example.org/2023/03/10/circle-svb-exposure");
    for (std::size_t i = 1; i < svb.content.size(); ++i) {
        EXPECT_LE(svb.content[i - 1].at("date").get<std::string>(), svb.content[i].at("date").get<std::string>());
    }

    EXPECT_TRUE(server.call(mcp::kNewsUsdc, Json{{"start", "2021-01-01"}, {"end", "2021-01-31"}}).content.empty());
    const auto inverted = server.call(mcp::kNewsUsdt, Json{{"start", "2022-05-13"}, {"end", "2022-05-07"}});
    EXPECT_TRUE(inverted.is_error);
}

TEST_F(McpTest, NewsRangeMatchesCorpusScan) {
    const auto corpus = load_news_jsonl(fixture_dir() / "news.jsonl");
    mcp::ToolServer server(*store_);
    const Date lo = Date::from_ymd(2022, 1, 1);
    for (int i = 0; i < 400; ++i) {
        const Date start = lo + (i * 37) % 900;
        const Date end = start + (i * 13) % 120;
        for (const AssetId& asset : {AssetId::usdt(), AssetId::usdc()}) {
            std::vector<std::string> expected;
            std::vector<const NewsItem*> hits;
            for (const auto& item : corpus) {
                if (item.tagged(asset) && item.published_date >= start && item.published_date <= end) hits.push_back(&item);
            }
            std::stable_sort(hits.begin(), hits.end(), [](const NewsItem* a, const NewsItem* b) {
                return std::tie(a->published_date, a->url) < std::tie(b->published_date, b->url);
            });
            for (const auto* h : hits) expected.push_back(h->url);
            const auto r = server.call(*mcp::news_range_tool_for(asset), Json{{"start", start.iso()}, {"end", end.iso()}});
            std::vector<std::string> got;
            for (const auto& item : r.content) got.push_back(item.at("url"));
            ASSERT_EQ(got, expected) << asset.symbol() << " " << start.iso() << ".." << end.iso();
        }
    }
}

TEST_F(McpTest, Articles) {
    const auto corpus = load_news_jsonl(fixture_dir() / "news.jsonl");
    mcp::ToolServer server(*store_);
    for (const auto& item : corpus) {
        const auto r = server.call(mcp::kNewsArticle, Json{{"url", item.url}});
        ASSERT_FALSE(r.is_error);
        EXPECT_EQ(r.content.at("body_text"), item.body_text);
        EXPECT_EQ(r.content.at("title"), item.headline);
    }
    const auto frag = server.call(mcp::kNewsArticle,
                                  Json{{"url", "https://news.example.org/2023/03/10/circle-svb-exposure#details"}});
    const auto plain =
        server.call(mcp::kNewsArticle, Json{{"url", "https://news.example.org/2023/03/10/circle-svb-exposure"}});
    EXPECT_EQ(canonical_dump(frag.to_json()), canonical_dump(plain.to_json()));
    const auto missing = server.call(mcp::kNewsArticle, Json{{"url", "https://news.example.org/nothing"}});
    EXPECT_TRUE(missing.is_error);
    EXPECT_EQ(missing.content.at("message"), "article not found");
}

TEST_F(McpTest, SummaryTruncatesOnCodePoints) {
    NewsItem item;
    item.body_text = std::string(399, 'a') + "\xc3\xa9\xc3\xa9";
    const auto s = news_summary(item);
    EXPECT_EQ(s, std::string(399, 'a') + "\xc3\xa9");
}

TEST_F(McpTest, ProtocolErrors) {
    mcp::ToolServer server(*store_);
    auto code = [&](const std::string& line) { return rpc(server, line).at("error").at("code").get<int>(); };
    EXPECT_EQ(code(call_line("no.such_tool", Json::object())), mcp::rpc::kInvalidParams);
    EXPECT_EQ(code(call_line("market.usdt_snapshot", Json{{"day", "2022-05-18"}})), mcp::rpc::kInvalidParams);
    EXPECT_EQ(code(call_line("market.usdt_snapshot", Json{{"date", "18/05/2022"}})), mcp::rpc::kInvalidParams);
    EXPECT_EQ(code(call_line(std::string(mcp::kAttestationDocument), Json{{"asset", "USDT"}})), mcp::rpc::kInvalidParams);
    EXPECT_EQ(code(R"({"jsonrpc":"2.0","id":1,"method":"resources/list"})"), mcp::rpc::kMethodNotFound);
    EXPECT_EQ(code(R"({"jsonrpc":"2.0","id":1,"method":"tools/call","params":[]})"), mcp::rpc::kInvalidParams);
    EXPECT_EQ(code("{broken"), mcp::rpc::kParseError);
    EXPECT_EQ(code("[1,2]"), mcp::rpc::kInvalidRequest);
    EXPECT_EQ(code(R"({"jsonrpc":"1.0","id":1,"method":"tools/list"})"), mcp::rpc::kInvalidRequest);
    EXPECT_FALSE(server.handle(R"({"jsonrpc":"2.0","method":"notifications/initialized"})").has_value());
    EXPECT_FALSE(server.handle("   ").has_value());
}

TEST_F(McpTest, EveryCallIsLogged) {
    mcp::ToolServer server(*store_);
    std::vector<mcp::ToolCallRecord> mirrored;
    server.on_log([&](const mcp::ToolCallRecord& r) { mirrored.push_back(r); });
    std::size_t calls = 0;
    for (const auto& line : request_pool()) {
        const Json req = Json::parse(line, nullptr, false);
        if (!req.is_discarded() && req.is_object() && req.value("jsonrpc", "") == "2.0" &&
            req.value("method", "") == "tools/call") {
            ++calls;
        }
        server.handle(line);
    }
    ASSERT_EQ(server.log().size(), calls);
    ASSERT_EQ(mirrored.size(), calls);
    for (std::size_t i = 0; i < calls; ++i) {
        EXPECT_EQ(server.log()[i].seq, i + 1);
        EXPECT_EQ(server.log()[i].result_digest.size(), 64u);
        EXPECT_FALSE(server.log()[i].to_json().contains("wall_time_ms"));
    }
}

TEST_F(McpTest, ServeStreamsOneResponsePerRequest) {
    mcp::ToolServer server(*store_);
    std::istringstream in(R"({"jsonrpc":"2.0","id":1,"method":"ping"})"
                          "\n\n"
                          R"({"jsonrpc":"2.0","method":"notifications/initialized"})"
                          "\n"
                          R"({"jsonrpc":"2.0","id":2,"method":"tools/list"})"
                          "\n");
    std::ostringstream out;
    server.serve(in, out);
    std::istringstream replies(out.str());
    std::vector<std::string> lines;
    for (std::string l; std::getline(replies, l);) lines.push_back(l);
    ASSERT_EQ(lines.size(), 2u);
    EXPECT_EQ(lines[0], R"({"id":1,"jsonrpc":"2.0","result":{}})");
}

TEST_F(McpTest, GoldenTranscript) {
    const auto requests = read_lines(golden_dir() / "session_requests.jsonl");
    const auto expected = read_lines(golden_dir() / "session_responses.jsonl");
    ASSERT_GE(requests.size(), 20u);
    for (int run = 0; run < 2; ++run) {
        mcp::ToolServer server(*store_);
        std::vector<std::string> got;
        for (const auto& line : requests) {
            if (auto reply = server.handle(line)) got.push_back(*reply);
        }
        ASSERT_EQ(got.size(), expected.size());
        for (std::size_t i = 0; i < got.size(); ++i) EXPECT_EQ(got[i], expected[i]) << "response " << i;
    }
}

TEST_F(McpTest, InterleavingDoesNotChangeResponses) {
    const auto report = prop_interleaving(*store_, 1000, 0x5eed03);
    EXPECT_TRUE(report.ok()) << report.first_failure;
}
