#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "pegscope/report.hpp"

namespace fs = std::filesystem;
using namespace pegscope;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;

struct Shared {
    std::string data_dir = "pegscope-data";
    std::string config;
};

Thresholds load_thresholds(const Shared& shared) {
    return shared.config.empty() ? Thresholds{} : Thresholds::load(shared.config);
}

std::pair<AssetId, Date> parse_fetch_spec(const std::string& spec) {
    const auto colon = spec.find(':');
    if (colon == std::string::npos) throw CLI::ValidationError("--fetch", "expected ASSET:YYYY-MM-DD, got " + spec);
    return {AssetId{spec.substr(0, colon)}, Date::parse_iso(spec.substr(colon + 1))};
}

int run_ingest(const Shared& shared, const std::vector<std::string>& market, const std::vector<std::string>& att,
               const std::vector<std::string>& news, const std::vector<std::string>& fetch,
               const RemoteConfig& remote) {
    IngestOptions options;
    for (const auto& p : market) options.market.emplace_back(p);
    for (const auto& p : att) options.attestations.emplace_back(p);
    for (const auto& p : news) options.news.emplace_back(p);
    for (const auto& f : fetch) options.fetch.push_back(parse_fetch_spec(f));
    options.remote = remote;
    Store store(shared.data_dir, OpenMode::read_write);
    std::cout << cmd_ingest(store, options).render();
    return kExitOk;
}

int run_serve(const Shared& shared, const std::string& call_log) {
    const Store store(shared.data_dir, OpenMode::read_only);
    mcp::ToolServer server(store);
    std::ofstream log_out;
    if (!call_log.empty()) {
        log_out.open(call_log, std::ios::app);
        if (!log_out) throw IoError("cannot open call log " + call_log);
        server.on_log([&](const mcp::ToolCallRecord& rec) { log_out << canonical_dump(rec.to_json(true)) << '\n' << std::flush; });
    }
    server.serve(std::cin, std::cout);
    return kExitOk;
}

int run_analyze(const Shared& shared, const std::optional<std::string>& asset, const std::string& format,
                const std::string& out_dir, unsigned jobs, const std::optional<std::string>& as_of, bool no_persist) {
    AnalyzeOptions options;
    if (asset) options.asset = AssetId{*asset};
    options.thresholds = load_thresholds(shared);
    if (as_of) options.as_of = Date::parse(*as_of);
    options.jobs = jobs;
    options.persist = !no_persist;
    Store store(shared.data_dir, OpenMode::read_write);
    const AnalyzeReport report = cmd_analyze(store, options);
    write_analyze_outputs(report, out_dir.empty() ? fs::path(shared.data_dir) / "reports" : fs::path(out_dir),
                          options.thresholds);

    const bool several = report.assets.size() > 1;
    for (const auto& a : report.assets) {
        if (format == "csv") {
            if (several) std::cout << "# " << a.asset.symbol() << '\n';
            std::cout << render_report_csv(a.rows);
        } else {
            std::cout << a.asset.symbol() << " (" << a.rows.size() << " rows)\n" << render_report_text(a.rows) << '\n';
        }
    }
    if (!report.skipped.empty()) {
        std::ostream& out = format == "csv" ? std::cerr : std::cout;
        out << "skipped:\n";
        for (const auto& s : report.skipped) {
            out << "  " << s.asset.symbol() << ' ' << s.report_date.iso() << " [" << s.stage << "] " << s.reason << '\n';
        }
    }
    return kExitOk;
}

int run_event_study(const Shared& shared, const std::string& asset, const std::string& center, int span,
                    const std::string& format) {
    const Store store(shared.data_dir, OpenMode::read_only);
    const auto report = cmd_event_study(store, AssetId{asset}, Date::parse(center), span, load_thresholds(shared));
    if (format == "json") {
        std::cout << report.to_json().dump(2) << '\n';
    } else {
        std::cout << report.render_text();
    }
    return kExitOk;
}

int run_export(const Shared& shared, const std::string& out_dir) {
    Store store(shared.data_dir, OpenMode::read_write);
    AnalyzeOptions options;
    options.thresholds = load_thresholds(shared);
    options.persist = false;
    const auto report = cmd_analyze(store, options);
    for (const auto& p : cmd_export_figures(report, out_dir.empty() ? fs::path(shared.data_dir) / "figures"
                                                                      : fs::path(out_dir))) {
        std::cout << p.string() << '\n';
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"pegscope: stablecoin attestation and market transparency analysis"};
    app.require_subcommand(1);
    Shared shared;
    app.add_option("--data-dir", shared.data_dir, "store directory")->capture_default_str();
    app.add_option("--config", shared.config, "threshold configuration (JSON)");

    auto* ingest = app.add_subcommand("ingest", "load fixture files into the store");
    std::vector<std::string> market, att, news, fetch;
    RemoteConfig remote;
    ingest->add_option("--market", market, "market CSV file (repeatable)");
    ingest->add_option("--attestations", att, "attestation record file (repeatable)");
    ingest->add_option("--news", news, "news JSONL file (repeatable)");
    ingest->add_option("--fetch", fetch, "fetch ASSET:YYYY-MM-DD from the remote endpoint (repeatable)");
    ingest->add_option("--endpoint", remote.endpoint, "remote market endpoint base URL");
    ingest->add_flag("--allow-network", remote.allow_network, "permit remote requests");
    ingest->add_option("--timeout", remote.timeout_seconds, "remote timeout in seconds")->check(CLI::PositiveNumber);

    auto* serve = app.add_subcommand("serve", "run the tool server on stdio");
    std::string call_log;
    serve->add_option("--call-log", call_log, "append tool-call records (JSON lines) to this file");

    auto* analyze = app.add_subcommand("analyze", "classify every stored attestation");
    std::optional<std::string> asset_opt;
    std::string format = "text";
    std::string out_dir;
    unsigned jobs = 1;
    std::optional<std::string> as_of;
    bool no_persist = false;
    analyze->add_option("--asset", asset_opt, "restrict to one asset");
    analyze->add_option("--format", format, "stdout format")->check(CLI::IsMember({"csv", "text"}))->capture_default_str();
    analyze->add_option("--out-dir", out_dir, "report directory (default <data-dir>/reports)");
    analyze->add_option("--jobs", jobs, "worker threads")->check(CLI::Range(1u, 64u));
    analyze->add_option("--as-of", as_of, "reference date for attestation staleness");
    analyze->add_flag("--no-persist", no_persist, "do not write outcome and trace records");

    auto* event = app.add_subcommand("event-study", "market and news window around a date");
    std::string ev_asset, center, ev_format = "text";
    int span = 3;
    event->add_option("--asset", ev_asset, "asset symbol")->required();
    event->add_option("--center", center, "center date")->required();
    event->add_option("--span", span, "days on each side")->check(CLI::NonNegativeNumber)->capture_default_str();
    event->add_option("--format", ev_format, "output format")->check(CLI::IsMember({"text", "json"}))->capture_default_str();

    auto* figures = app.add_subcommand("export-figures", "write figure series CSV files");
    std::string fig_dir;
    figures->add_option("--out-dir", fig_dir, "output directory (default <data-dir>/figures)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*ingest) return run_ingest(shared, market, att, news, fetch, remote);
        if (*serve) return run_serve(shared, call_log);
        if (*analyze) return run_analyze(shared, asset_opt, format, out_dir, jobs, as_of, no_persist);
        if (*event) return run_event_study(shared, ev_asset, center, span, ev_format);
        if (*figures) return run_export(shared, fig_dir);
    } catch (const CLI::ValidationError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const ParseError& e) {
        std::cerr << "parse error: " << e.what() << '\n';
        return kExitData;
    } catch (const Error& e) {
        std::cerr << to_string(e.kind()) << " error: " << e.what() << '\n';
        return kExitData;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitData;
    }
    return kExitUsage;
}
