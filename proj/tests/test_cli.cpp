#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdio>
#include <fstream>
#include <sstream>

#include "support/fixture_env.hpp"

using namespace pegscope::testing;

namespace {

struct Run {
    int code = -1;
    std::string out;
};

std::string quote(const std::string& s) { return "'" + s + "'"; }

Run run(const std::string& args, const std::string& stdin_text = "") {
    TempDir scratch("cli");
    const auto in_path = scratch.path() / "stdin";
    const auto out_path = scratch.path() / "stdout";
    std::ofstream(in_path) << stdin_text;
    const std::string cmd = quote(PEGSCOPE_CLI) + " " + args + " < " + quote(in_path.string()) + " > " +
                            quote(out_path.string()) + " 2>/dev/null";
    const int status = std::system(cmd.c_str());
    Run r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    std::ifstream in(out_path);
    std::ostringstream ss;
    ss << in.rdbuf();
    r.out = ss.str();
    return r;
}

std::string ingest_args(const std::filesystem::path& data) {
    const auto f = fixture_dir();
    return "--data-dir " + quote(data.string()) + " ingest --market " + quote((f / "market_reports.csv").string()) +
           " --market " + quote((f / "market_events.csv").string()) + " --attestations " +
           quote((f / "attestations_usdt.json").string()) + " --attestations " +
           quote((f / "attestations_usdc.json").string()) + " --news " + quote((f / "news.jsonl").string());
}

}  // namespace

TEST(Cli, UsageErrorsExitOne) {
    EXPECT_EQ(run("").code, 1);
    EXPECT_EQ(run("bogus").code, 1);
    EXPECT_EQ(run("event-study --asset USDT").code, 1);
    EXPECT_EQ(run("analyze --format xml").code, 1);
    EXPECT_EQ(run("--help").code, 0);
}

TEST(Cli, IngestIsIdempotent) {
    TempDir data("cli-data");
    const auto first = run(ingest_args(data.path()));
    ASSERT_EQ(first.code, 0);
    EXPECT_NE(first.out.find("attestation"), std::string::npos);
    const auto second = run(ingest_args(data.path()));
    ASSERT_EQ(second.code, 0);
    EXPECT_NE(second.out.find("31 extractable"), std::string::npos) << second.out;
}

TEST(Cli, DataErrorsExitTwo) {
    TempDir data("cli-missing");
    EXPECT_EQ(run("--data-dir " + quote((data.path() / "none").string()) + " serve").code, 2);
    EXPECT_EQ(run("--data-dir " + quote(data.path().string()) + " ingest --market /nonexistent.csv").code, 2);
    EXPECT_EQ(run("--data-dir " + quote(data.path().string()) + " ingest --fetch USDT:2022-05-18").code, 2);
}

TEST(Cli, ServeAnalyzeEventStudyExport) {
    TempDir data("cli-full");
    ASSERT_EQ(run(ingest_args(data.path())).code, 0);
    const std::string dd = "--data-dir " + quote(data.path().string());

    const auto served = run(dd + " serve", "{\"jsonrpc\":\"2.0\",\"id\":1,\"method\":\"tools/list\"}\n");
    EXPECT_EQ(served.code, 0);
    EXPECT_NE(served.out.find("market.usdt_snapshot"), std::string::npos);
    EXPECT_EQ(run(dd + " serve").code, 0);

    const auto out_dir = data.path() / "out";
    const auto analyzed = run(dd + " analyze --asset USDT --format csv --out-dir " + quote(out_dir.string()));
    EXPECT_EQ(analyzed.code, 0);
    EXPECT_EQ(analyzed.out.find("report_date,price_usd"), 0u) << analyzed.out;
    EXPECT_TRUE(std::filesystem::exists(out_dir / "report_USDT.csv"));

    const auto text = run(dd + " analyze --asset USDC --format text --no-persist");
    EXPECT_EQ(text.code, 0);
    EXPECT_NE(text.out.find("2022-06-22"), std::string::npos);

    const auto ev = run(dd + " event-study --asset USDC --center 2023-03-11 --format json");
    EXPECT_EQ(ev.code, 0);
    EXPECT_NE(ev.out.find("\"peak_peg_stress\": \"abnormal\""), std::string::npos) << ev.out;
    EXPECT_EQ(run(dd + " event-study --asset USDT --center 2019-01-01").code, 2);

    const auto figs = data.path() / "figs";
    EXPECT_EQ(run(dd + " export-figures --out-dir " + quote(figs.string())).code, 0);
    EXPECT_TRUE(std::filesystem::exists(figs / "fig3_coverage.csv"));
}

TEST(Cli, EmptyStoreAnalyzeSucceeds) {
    TempDir data("cli-empty");
    ASSERT_EQ(run("--data-dir " + quote(data.path().string()) + " ingest").code, 0);
    EXPECT_EQ(run("--data-dir " + quote(data.path().string()) + " analyze").code, 0);
}
