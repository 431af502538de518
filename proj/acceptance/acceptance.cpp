// Acceptance runner: one PASS/FAIL line per criterion, non-zero exit if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "pegscope/report.hpp"
#include "support/fixture_env.hpp"
#include "support/oracles.hpp"
#include "support/properties.hpp"
#include "support/published_rows.hpp"

using namespace pegscope;
using namespace pegscope::testing;

namespace {

struct Verdict {
    bool pass = true;
    std::vector<std::string> notes;

    void check(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            notes.push_back("FAILED " + what);
        }
    }
    void note(const std::string& what) { notes.push_back(what); }
};

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

bool rel_close(double got, double want, double tol) {
    if (want == 0.0) return std::abs(got) <= tol;
    return std::abs(got - want) <= tol * std::abs(want);
}

std::map<std::string, ReportRow> rows_by_key(const AnalyzeReport& report) {
    std::map<std::string, ReportRow> out;
    for (const auto& a : report.assets) {
        for (const auto& r : a.rows) out.emplace(r.asset.symbol() + " " + r.report_date.iso(), r);
    }
    return out;
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
    std::ifstream in(path);
    std::vector<std::string> lines;
    for (std::string line; std::getline(in, line);) lines.push_back(line);
    return lines;
}

AnalyzeReport analyze_fixtures(Store& store, double* elapsed_ms) {
    const auto t0 = std::chrono::steady_clock::now();
    cmd_ingest(store, fixture_ingest_options());
    AnalyzeOptions opts;
    opts.persist = false;
    auto report = cmd_analyze(store, opts);
    if (elapsed_ms) {
        *elapsed_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    }
    return report;
}

Verdict criterion1() {
    Verdict v;
    Store store;
    double ms = 0;
    const auto rows = rows_by_key(analyze_fixtures(store, &ms));
    std::size_t checked = 0;
    double worst_rel = 0, worst_gap = 0;
    for (const auto* table : {&published_usdt_rows(), &published_usdc_rows()}) {
        for (const auto& p : *table) {
            const std::string key = std::string(p.asset) + " " + Date::parse(p.date_dmy).iso();
            auto it = rows.find(key);
            v.check(it != rows.end(), key + " missing from analyze output");
            if (it == rows.end()) continue;
            const auto& r = it->second;
            const std::pair<const char*, std::pair<double, double>> rel[] = {
                {"turnover_ratio", {r.turnover_ratio, p.turnover_ratio}},
                {"peg_deviation_pct", {r.peg_deviation_pct, p.peg_deviation_pct}},
                {"coverage_ratio", {r.coverage_ratio, p.coverage_ratio}},
                {"implied_mcap", {r.implied_mcap, p.implied_mcap}},
            };
            for (const auto& [name, gw] : rel) {
                const double e = gw.second == 0 ? std::abs(gw.first) : std::abs(gw.first / gw.second - 1.0);
                worst_rel = std::max(worst_rel, e);
                v.check(rel_close(gw.first, gw.second, 1e-3),
                        key + " " + name + " " + fmt("%.6g", gw.first) + " vs " + fmt("%.6g", gw.second));
            }
            const double gap_err = std::abs(r.supply_gap_pct - p.supply_gap_pct);
            worst_gap = std::max(worst_gap, gap_err);
            v.check(gap_err <= 0.05, key + " supply_gap_pct " + fmt("%.4f", r.supply_gap_pct) + " vs " +
                                         fmt("%.4f", p.supply_gap_pct));
            ++checked;
        }
    }
    v.check(checked == 31, "expected 31 rows, compared " + std::to_string(checked));
    v.check(ms < 1000.0, "runtime " + fmt("%.1f", ms) + " ms");
    v.note(std::to_string(checked) + " rows; worst relative error " + fmt("%.2e", worst_rel) +
           "; worst supply-gap error " + fmt("%.4f", worst_gap) + " pp; ingest+analyze " + fmt("%.1f", ms) + " ms");
    return v;
}

Verdict criterion2() {
    Verdict v;
    Store store;
    const auto report = analyze_fixtures(store, nullptr);
    const auto rows = rows_by_key(report);
    std::map<std::string, int> usdt, usdc;
    std::size_t matched = 0;
    for (const auto* table : {&published_usdt_rows(), &published_usdc_rows()}) {
        for (const auto& p : *table) {
            const std::string key = std::string(p.asset) + " " + Date::parse(p.date_dmy).iso();
            auto it = rows.find(key);
            if (it == rows.end()) {
                v.check(false, key + " missing");
                continue;
            }
            const std::string got = to_string(it->second.analysis_outcome);
            (std::string(p.asset) == "USDT" ? usdt : usdc)[got]++;
            if (got == p.analysis_outcome) {
                ++matched;
            } else {
                v.check(false, key + " labelled " + got + ", expected " + p.analysis_outcome);
            }
        }
    }
    v.check(usdt["abnormal"] == 1 && usdt["suspicious"] == 1 && usdt["normal"] == 6, "USDT label counts");
    v.check(usdc["suspicious"] == 4 && usdc["normal"] == 19 && usdc["abnormal"] == 0, "USDC label counts");
    v.note("labels reproduced " + std::to_string(matched) + "/31");

    for (const auto& k : knife_edge(calibration_rows(), Thresholds{})) {
        const std::string line = k.name + "=" + fmt("%g", k.threshold) + " nearest fixture value " +
                                 fmt("%.4f", k.nearest) + " distance " + fmt("%.4f", k.distance);
        if (k.ok) {
            v.note("margin ok: " + line);
        } else {
            v.check(false, "5% margin: " + line);
        }
    }
    return v;
}

Verdict criterion3() {
    Verdict v;
    Store store;
    const auto report = analyze_fixtures(store, nullptr);
    const Date stub = Date::from_ymd(2022, 6, 22);
    v.check(report.skipped.size() == 1, std::to_string(report.skipped.size()) + " skipped rows");
    for (const auto& s : report.skipped) {
        v.check(s.asset == AssetId::usdc() && s.report_date == stub && s.stage == "disclosure",
                "skipped " + s.asset.symbol() + " " + s.report_date.iso() + " at " + s.stage);
        v.note("skipped " + s.asset.symbol() + " " + s.report_date.iso() + " [" + s.stage + "/" + s.kind + "] " + s.reason);
    }
    for (const auto& a : report.assets) {
        for (const auto& r : a.rows) v.check(!(r.asset == AssetId::usdc() && r.report_date == stub), "stub was classified");
    }
    return v;
}

Verdict criterion4() {
    Verdict v;
    TempDir dir("acceptance-store");
    {
        Store build(dir.path(), OpenMode::read_write);
        cmd_ingest(build, fixture_ingest_options());
    }
    Store store(dir.path(), OpenMode::read_only);
    const auto requests = read_lines(golden_dir() / "session_requests.jsonl");
    const auto expected = read_lines(golden_dir() / "session_responses.jsonl");
    v.check(requests.size() >= 20, std::to_string(requests.size()) + " golden requests");
    for (int replay = 0; replay < 2; ++replay) {
        mcp::ToolServer server(store);
        std::vector<std::string> got;
        for (const auto& line : requests) {
            if (auto reply = server.handle(line)) got.push_back(*reply);
        }
        v.check(got == expected, "replay " + std::to_string(replay + 1) + " differs from golden transcript");
    }
    v.note(std::to_string(requests.size()) + " requests, " + std::to_string(expected.size()) +
           " responses, replayed twice");
    const auto inter = prop_interleaving(store, 1000, 0xacce55);
    v.check(inter.ok() && inter.cases >= 1000, "interleaving: " + inter.first_failure);
    v.note("interleavings " + std::to_string(inter.cases) + ", failures " + std::to_string(inter.failures));
    return v;
}

Verdict criterion5() {
    Verdict v;
    const std::string list = R"({"jsonrpc":"2.0","id":1,"method":"tools/list"})";
    TempDir dir("acceptance-restart");
    std::string first, second;
    {
        Store build(dir.path(), OpenMode::read_write);
        cmd_ingest(build, fixture_ingest_options());
        mcp::ToolServer server(build);
        first = server.handle(list).value_or("");
    }
    {
        Store reopened(dir.path(), OpenMode::read_only);
        mcp::ToolServer server(reopened);
        second = server.handle(list).value_or("");
    }
    v.check(!first.empty() && first == second, "tools/list bytes differ across restart");
    const Json tools = Json::parse(first).at("result").at("tools");
    std::vector<std::string> names;
    for (const auto& t : tools) names.push_back(t.at("name"));
    const std::vector<std::string> want{"market.usdt_snapshot", "market.usdc_snapshot", "news.usdt_range",
                                        "news.usdc_range", "news.article"};
    v.check(names == want, "tool names");
    std::string joined;
    for (const auto& n : names) joined += (joined.empty() ? "" : ", ") + n;
    v.note(std::to_string(names.size()) + " tools: " + joined + "; tools/list sha256 " +
           sha256_hex(first).substr(0, 16));
    return v;
}

Verdict criterion6() {
    Verdict v;
    Store store;
    cmd_ingest(store, fixture_ingest_options());
    const Thresholds t;
    const auto usdt = cmd_event_study(store, AssetId::usdt(), Date::from_ymd(2022, 5, 12), 1, t);
    const auto usdc = cmd_event_study(store, AssetId::usdc(), Date::from_ymd(2022, 5, 12), 1, t);
    v.check(usdt.window.days_present == 3 && usdc.window.days_present == 3, "11-13 May days present");
    v.check(rel_close(usdt.window.mcap_change, -3.8e9, 0.10), "USDT mcap change " + fmt("%.4g", usdt.window.mcap_change));
    v.check(rel_close(usdc.window.mcap_change, 1.4e9, 0.10), "USDC mcap change " + fmt("%.4g", usdc.window.mcap_change));
    v.note("May 2022 11-13: USDT mcap change " + fmt("%.4g", usdt.window.mcap_change) + ", USDC " +
           fmt("%.4g", usdc.window.mcap_change));

    const Date svb = Date::from_ymd(2023, 3, 11);
    const auto c = cmd_event_study(store, AssetId::usdc(), svb, kEventSpanDays, t);
    v.check(c.window.min_price >= 0.88 && c.window.min_price <= 0.90, "USDC min price " + fmt("%.4g", c.window.min_price));
    v.check(c.peak(Indicator::peg_stress) == Severity::abnormal, "USDC peg_stress peak not abnormal");
    const auto d = cmd_event_study(store, AssetId::usdt(), svb, kEventSpanDays, t);
    double max_peg = -1e9;
    for (const auto& day : d.days) max_peg = std::max(max_peg, day.derived.peg_deviation_pct);
    v.check(max_peg > 0 && rel_close(max_peg, 1.0, 0.10), "USDT premium " + fmt("%.4f", max_peg));
    v.note("March 2023: USDC min price " + fmt("%.4g", c.window.min_price) + ", peg_stress " +
           to_string(c.peak(Indicator::peg_stress)) + "; USDT peak peg deviation " + fmt("%+.3f", max_peg) + " %");
    return v;
}

Verdict from_property(const PropertyReport& r, std::size_t min_cases, Verdict v = {}) {
    v.check(r.ok() && r.cases >= min_cases, r.name + " (" + std::to_string(r.failures) + " failures) " + r.first_failure);
    v.note(r.name + ": " + std::to_string(r.cases) + " cases, " + std::to_string(r.failures) + " failures");
    return v;
}

Verdict criterion7() { return from_property(prop_extraction_roundtrip(200, 0x7e47), 200); }

Verdict criterion8() {
    Verdict v;
    const std::function<PropertyReport(std::size_t, std::uint64_t)> props[] = {
        prop_supply_gap_zero,       prop_gap_consistency,         prop_window_bruteforce, prop_canonical_fixed_point,
        prop_store_range_scan,      prop_classifier_monotonicity, prop_ranking_determinism,
    };
    std::uint64_t seed = 0x8000;
    for (const auto& p : props) v = from_property(p(1000, seed++), 1000, v);
    return v;
}

}  // namespace

int main() {
    const std::pair<const char*, std::function<Verdict()>> criteria[] = {
        {"1 derived-metric reproduction", criterion1}, {"2 label reproduction", criterion2},
        {"3 exclusion handling", criterion3},          {"4 protocol determinism", criterion4},
        {"5 five-tool contract", criterion5},          {"6 event-study reproduction", criterion6},
        {"7 extraction round trip", criterion7},       {"8 property suites", criterion8},
    };
    int failed = 0;
    for (const auto& [name, run] : criteria) {
        Verdict v;
        try {
            v = run();
        } catch (const std::exception& e) {
            v.pass = false;
            v.notes.push_back(std::string("FAILED exception: ") + e.what());
        }
        std::printf("criterion %s: %s\n", name, v.pass ? "PASS" : "FAIL");
        for (const auto& n : v.notes) std::printf("    %s\n", n.c_str());
        failed += !v.pass;
    }
    std::printf("%d/8 criteria passed\n", 8 - failed);
    return failed == 0 ? 0 : 1;
}
