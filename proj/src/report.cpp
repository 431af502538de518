#include "pegscope/report.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <map>
#include <mutex>
#include <thread>

namespace pegscope {
namespace {

std::string sci(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3E", v);
    return buf;
}

std::string pad(std::string s, std::size_t width) {
    if (s.size() < width) s.insert(0, width - s.size(), ' ');
    return s;
}

std::string utc_timestamp(std::chrono::system_clock::time_point tp) {
    const auto secs = std::chrono::floor<std::chrono::seconds>(tp);
    const auto day = std::chrono::floor<std::chrono::days>(secs);
    const std::chrono::year_month_day ymd{day};
    const std::chrono::hh_mm_ss hms{secs - day};
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                  static_cast<int>(hms.hours().count()), static_cast<int>(hms.minutes().count()),
                  static_cast<int>(hms.seconds().count()));
    return buf;
}

std::string csv_field(std::string_view s) {
    if (s.find_first_of(",\"\n") == std::string_view::npos) return std::string(s);
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::vector<double> numeric_columns(const ReportRow& r) {
    return {r.price_usd,       r.mcap_usd,          r.volume_daily,  r.turnover_ratio, r.peg_deviation_pct,
            r.volatility_daily, r.circulation_rep,  r.asset_value,   r.liability_value, r.coverage_ratio,
            r.implied_mcap,    r.supply_gap_pct};
}

}  // namespace

ReportRow make_report_row(const PipelineResult& result) {
    const auto& ctx = result.context;
    const auto& s = ctx.report_day_snapshot;
    const auto& f = result.extract.figures.value();
    const AlignmentMetrics a = align(f, s);
    ReportRow r;
    r.asset = result.outcome.asset;
    r.report_date = result.outcome.report_date;
    r.price_usd = s.price_usd;
    r.mcap_usd = s.mcap_usd;
    r.volume_daily = s.volume_daily;
    r.turnover_ratio = ctx.report_day_derived.turnover_ratio;
    r.peg_deviation_pct = ctx.report_day_derived.peg_deviation_pct;
    r.volatility_daily = s.volatility_daily;
    r.circulation_rep = f.circulation_rep;
    r.asset_value = f.asset_value;
    r.liability_value = f.liability_value;
    r.coverage_ratio = a.coverage_ratio;
    r.implied_mcap = a.implied_mcap;
    r.supply_gap_pct = a.supply_gap_pct;
    r.analysis_outcome = result.outcome.label;
    return r;
}

std::string render_report_csv(std::span<const ReportRow> rows) {
    std::string out(kReportCsvHeader);
    out += '\n';
    for (const auto& r : rows) {
        out += r.report_date.iso();
        for (double v : numeric_columns(r)) {
            out += ',';
            out += shortest_decimal(v);
        }
        out += ',';
        out += to_string(r.analysis_outcome);
        out += '\n';
    }
    return out;
}

std::string render_report_text(std::span<const ReportRow> rows) {
    static const std::vector<std::string> kHeads = {
        "report_date", "price_usd",    "mcap_usd",     "volume_daily",   "turnover_ratio",
        "peg_dev_pct", "volatility",   "circ_rep",     "asset_value",    "liability_value",
        "coverage",    "implied_mcap", "supply_gap",   "outcome"};
    std::vector<std::vector<std::string>> cells;
    cells.push_back(kHeads);
    for (const auto& r : rows) {
        std::vector<std::string> line{r.report_date.iso()};
        for (double v : numeric_columns(r)) line.push_back(sci(v));
        line.emplace_back(to_string(r.analysis_outcome));
        cells.push_back(std::move(line));
    }
    std::vector<std::size_t> width(kHeads.size(), 0);
    for (const auto& line : cells) {
        for (std::size_t i = 0; i < line.size(); ++i) width[i] = std::max(width[i], line[i].size());
    }
    std::string out;
    for (const auto& line : cells) {
        for (std::size_t i = 0; i < line.size(); ++i) {
            if (i) out += "  ";
            out += pad(line[i], width[i]);
        }
        out += '\n';
    }
    return out;
}

std::string render_skipped_csv(std::span<const SkippedRow> skipped) {
    std::string out = "asset,report_date,stage,kind,reason\n";
    for (const auto& s : skipped) {
        out += s.asset.symbol() + "," + s.report_date.iso() + "," + s.stage + "," + s.kind + "," +
               csv_field(s.reason) + "\n";
    }
    return out;
}

void write_text_file(const std::filesystem::path& path, std::string_view content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw IoError("write failed: " + path.string());
}

// ingest ------------------------------------------------------------------

const NamespaceCount& IngestSummary::count(Namespace ns) const {
    for (const auto& c : counts) {
        if (c.ns == ns) return c;
    }
    throw NotFoundError(std::string("no count for namespace ") + to_string(ns));
}

std::string IngestSummary::render() const {
    std::string out;
    for (const auto& c : counts) {
        out += std::string(to_string(c.ns)) + ": " + std::to_string(c.total) + " records (" +
               std::to_string(c.inserted) + " inserted, " + std::to_string(c.unchanged) + " unchanged)";
        if (c.ns == Namespace::attestation) {
            out += "; " + std::to_string(extractable_attestations) + " extractable, " +
                   std::to_string(image_only_attestations) + " image-only";
        }
        out += '\n';
    }
    return out;
}

IngestSummary cmd_ingest(Store& store, const IngestOptions& options) {
    std::vector<MarketSnapshot> market;
    std::vector<DisclosureExtract> attestations;
    std::vector<NewsItem> news;
    for (const auto& p : options.market) {
        auto rows = load_market_csv(p);
        market.insert(market.end(), rows.begin(), rows.end());
    }
    for (const auto& p : options.attestations) {
        auto rows = load_attestation_records(p);
        attestations.insert(attestations.end(), rows.begin(), rows.end());
    }
    for (const auto& p : options.news) {
        auto rows = load_news_jsonl(p);
        news.insert(news.end(), rows.begin(), rows.end());
    }

    IngestSummary summary;
    summary.counts = {{Namespace::market}, {Namespace::attestation}, {Namespace::news}};
    auto tally = [&](Namespace ns, PutOutcome outcome) {
        auto& c = summary.counts[ns == Namespace::market ? 0 : ns == Namespace::attestation ? 1 : 2];
        (outcome == PutOutcome::inserted ? c.inserted : c.unchanged) += 1;
    };
    for (const auto& s : market) {
        tally(Namespace::market, store.put(RecordKey::market(s.asset, s.date), snapshot_to_json(s)));
    }
    for (const auto& e : attestations) {
        tally(Namespace::attestation,
              store.put(RecordKey::attestation(e.asset, e.report_date), attestation_to_json(e)));
    }
    for (const auto& n : news) {
        tally(Namespace::news, store.put(RecordKey::news(n.url), news_to_json(n)));
    }
    if (!options.fetch.empty()) {
        RemoteMarketClient client(options.remote, store);
        for (const auto& [asset, date] : options.fetch) {
            const bool cached = store.contains(RecordKey::market(asset, date));
            client.fetch(asset, date);
            tally(Namespace::market, cached ? PutOutcome::unchanged : PutOutcome::inserted);
        }
    }

    for (auto& c : summary.counts) c.total = store.size(c.ns);
    for (const auto& [key, bytes] : store.scan(Namespace::attestation)) {
        const bool extractable = parse_canonical(bytes).value("extractable", false);
        (extractable ? summary.extractable_attestations : summary.image_only_attestations) += 1;
    }
    return summary;
}

// analyze -----------------------------------------------------------------

std::size_t AnalyzeReport::row_count() const {
    std::size_t n = 0;
    for (const auto& a : assets) n += a.rows.size();
    return n;
}

AnalyzeReport cmd_analyze(Store& store, const AnalyzeOptions& options) {
    std::vector<std::pair<AssetId, Date>> jobs;
    for (const auto& [key, bytes] : store.scan(Namespace::attestation)) {
        if (key.parts.size() < 2) continue;
        const AssetId asset{key.parts[0]};
        if (options.asset && asset != *options.asset) continue;
        jobs.emplace_back(asset, Date::parse_iso(key.parts[1]));
    }
    std::sort(jobs.begin(), jobs.end());

    struct Slot {
        std::optional<ReportRow> row;
        std::optional<SkippedRow> skipped;
    };
    std::vector<Slot> slots(jobs.size());
    const PipelineOptions pipeline_options{options.persist};

    auto run_one = [&](std::size_t i) {
        const auto& [asset, date] = jobs[i];
        RuleBackend backend(options.thresholds, ClassifyOptions{options.as_of});
        try {
            slots[i].row = make_report_row(run_pipeline(store, asset, date, backend, pipeline_options));
        } catch (const PipelineError& e) {
            slots[i].skipped = SkippedRow{asset, date, e.stage(), to_string(e.kind()), e.what()};
        }
    };

    const unsigned workers = std::max(1u, std::min<unsigned>(options.jobs, static_cast<unsigned>(jobs.size())));
    if (workers <= 1) {
        for (std::size_t i = 0; i < jobs.size(); ++i) run_one(i);
    } else {
        std::atomic<std::size_t> next{0};
        std::mutex error_mutex;
        std::exception_ptr first_error;
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < jobs.size(); i = next++) {
                    try {
                        run_one(i);
                    } catch (...) {
                        std::lock_guard lock(error_mutex);
                        if (!first_error) first_error = std::current_exception();
                    }
                }
            });
        }
        for (auto& t : pool) t.join();
        if (first_error) std::rethrow_exception(first_error);
    }

    AnalyzeReport report;
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        const AssetId& asset = jobs[i].first;
        if (report.assets.empty() || report.assets.back().asset != asset) report.assets.push_back({asset, {}});
        if (slots[i].row) report.assets.back().rows.push_back(*slots[i].row);
        if (slots[i].skipped) report.skipped.push_back(*slots[i].skipped);
    }
    return report;
}

std::vector<std::filesystem::path> write_analyze_outputs(const AnalyzeReport& report,
                                                         const std::filesystem::path& out_dir,
                                                         const Thresholds& thresholds) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create " + out_dir.string() + ": " + ec.message());
    std::vector<std::filesystem::path> written;
    Json files = Json::array();
    for (const auto& a : report.assets) {
        const auto csv = out_dir / ("report_" + a.asset.symbol() + ".csv");
        const auto txt = out_dir / ("report_" + a.asset.symbol() + ".txt");
        write_text_file(csv, render_report_csv(a.rows));
        write_text_file(txt, render_report_text(a.rows));
        written.push_back(csv);
        written.push_back(txt);
    }
    const auto skipped = out_dir / "skipped.csv";
    write_text_file(skipped, render_skipped_csv(report.skipped));
    written.push_back(skipped);
    for (const auto& p : written) files.push_back(p.filename().string());

    Json meta{{"generated_at", utc_timestamp(std::chrono::system_clock::now())},
              {"thresholds_digest", thresholds.digest()},
              {"rows", report.row_count()},
              {"skipped", report.skipped.size()},
              {"files", std::move(files)}};
    const auto meta_path = out_dir / "run_metadata.json";
    write_text_file(meta_path, meta.dump(2) + "\n");
    written.push_back(meta_path);
    return written;
}

// event-study -----------------------------------------------------------

Severity EventStudyReport::peak(Indicator indicator) const {
    Severity worst = Severity::normal;
    for (const auto& d : days) {
        for (const auto& f : d.findings) {
            if (f.indicator == indicator) worst = std::max(worst, f.severity);
        }
    }
    return worst;
}

Json EventStudyReport::to_json() const {
    Json day_json = Json::array();
    for (const auto& d : days) {
        Json findings = Json::array();
        for (const auto& f : d.findings) findings.push_back(f.to_json());
        day_json.push_back(Json{{"date", d.snapshot.date.iso()},
                                {"price_usd", d.snapshot.price_usd},
                                {"mcap_usd", d.snapshot.mcap_usd},
                                {"volume_daily", d.snapshot.volume_daily},
                                {"volatility_daily", d.snapshot.volatility_daily},
                                {"turnover_ratio", d.derived.turnover_ratio},
                                {"peg_deviation_pct", d.derived.peg_deviation_pct},
                                {"findings", std::move(findings)},
                                {"call_ref", d.call_ref}});
    }
    Json news_json = Json::array();
    for (const auto& n : news) {
        news_json.push_back(
            Json{{"date", n.date.iso()}, {"headline", n.headline}, {"url", n.url}, {"summary", n.summary}});
    }
    return Json{{"asset", asset.symbol()},
                {"center", center.iso()},
                {"span_days", span_days},
                {"window",
                 {{"first_date", window.first_date().iso()},
                  {"last_date", window.last_date().iso()},
                  {"days_present", window.days_present},
                  {"mean_price", window.mean_price},
                  {"min_price", window.min_price},
                  {"max_price", window.max_price},
                  {"max_abs_peg_dev_pct", window.max_abs_peg_dev_pct},
                  {"mean_turnover", window.mean_turnover},
                  {"mcap_change", window.mcap_change}}},
                {"peak_liquidity_stress", to_string(peak(Indicator::liquidity_stress))},
                {"peak_peg_stress", to_string(peak(Indicator::peg_stress))},
                {"days", std::move(day_json)},
                {"news", std::move(news_json)}};
}

std::string EventStudyReport::render_text() const {
    std::string out = asset.symbol() + " event window " + (center - span_days).iso() + ".." +
                      (center + span_days).iso() + " (center " + center.iso() + ")\n";
    out += "days present: " + std::to_string(window.days_present) + "/" + std::to_string(2 * span_days + 1) + "\n";
    out += "mcap change: " + sci(window.mcap_change) + " USD\n";
    out += "price: mean " + sig4(window.mean_price) + ", min " + sig4(window.min_price) + ", max " +
           sig4(window.max_price) + "\n";
    out += "max |peg deviation|: " + sig4(window.max_abs_peg_dev_pct) + " %\n";
    out += "mean turnover: " + sig4(window.mean_turnover) + "\n";
    out += std::string("peak liquidity_stress: ") + to_string(peak(Indicator::liquidity_stress)) +
           ", peak peg_stress: " + to_string(peak(Indicator::peg_stress)) + "\n\n";
    out += "      date   price_usd   mcap_usd  volume_daily  turnover  peg_dev_pct  findings\n";
    for (const auto& d : days) {
        std::string flags;
        for (const auto& f : d.findings) {
            if (f.severity == Severity::normal) continue;
            if (!flags.empty()) flags += ", ";
            flags += std::string(to_string(f.indicator)) + "=" + to_string(f.severity);
        }
        char line[160];
        std::snprintf(line, sizeof line, "%s  %10.4f  %9.3E  %12.3E  %8.4f  %11.4f  %s\n", d.snapshot.date.iso().c_str(),
                      d.snapshot.price_usd, d.snapshot.mcap_usd, d.snapshot.volume_daily, d.derived.turnover_ratio,
                      d.derived.peg_deviation_pct, flags.empty() ? "-" : flags.c_str());
        out += line;
    }
    if (!news.empty()) {
        out += "\nnews:\n";
        for (const auto& n : news) out += "  " + n.date.iso() + "  " + n.headline + "\n    " + n.url + "\n";
    }
    return out;
}

EventStudyReport cmd_event_study(const Store& store, const AssetId& asset, Date center, int span_days,
                                 const Thresholds& thresholds) {
    if (span_days < 0) throw DomainError("span must be non-negative");
    const auto market_tool = mcp::market_tool_for(asset);
    const auto news_tool = mcp::news_range_tool_for(asset);
    if (!market_tool || !news_tool) throw ContextError("no tools serve asset " + asset.symbol());

    mcp::ToolServer tools(store);
    EventStudyReport report;
    report.asset = asset;
    report.center = center;
    report.span_days = span_days;
    std::vector<MarketSnapshot> snapshots;
    for (Date d = center - span_days; d <= center + span_days; d = d + 1) {
        const auto r = tools.call(*market_tool, Json{{"date", d.iso()}});
        if (r.is_error) {
            if (d == center) {
                throw ContextError("missing center-day snapshot for " + asset.symbol() + " " + center.iso());
            }
            continue;
        }
        EventDay day;
        day.snapshot.asset = asset;
        day.snapshot.date = d;
        day.snapshot.price_usd = r.content.at("price_usd").get<double>();
        day.snapshot.mcap_usd = r.content.at("mcap_usd").get<double>();
        day.snapshot.volume_daily = r.content.at("volume_usd").get<double>();
        day.snapshot.volatility_daily = r.content.at("volatility_daily").get<double>();
        day.derived = derive(day.snapshot);
        day.findings = market_findings(day.snapshot, thresholds);
        day.call_ref = tools.log().back().seq;
        snapshots.push_back(day.snapshot);
        report.days.push_back(std::move(day));
    }
    report.window = aggregate_window(snapshots, center, span_days);

    const auto items = tools.call(*news_tool, Json{{"start", (center - span_days).iso()},
                                                   {"end", (center + span_days).iso()}});
    if (!items.is_error) {
        for (const auto& n : items.content) {
            report.news.push_back({Date::parse_iso(n.at("date").get<std::string>()), n.at("headline").get<std::string>(),
                                   n.at("url").get<std::string>(), n.at("summary").get<std::string>()});
        }
    }
    report.calls = tools.log();
    return report;
}

// export-figures ----------------------------------------------------------

std::vector<std::filesystem::path> cmd_export_figures(const AnalyzeReport& report,
                                                      const std::filesystem::path& out_dir) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create " + out_dir.string() + ": " + ec.message());

    std::string fig2 = std::string(kFig2Header) + "\n";
    std::string fig3 = std::string(kFig3Header) + "\n";
    std::string fig4 = std::string(kFig4Header) + "\n";
    auto row = [](std::string& out, const ReportRow& r, std::initializer_list<double> values) {
        out += r.asset.symbol() + "," + r.report_date.iso();
        for (double v : values) out += "," + shortest_decimal(v);
        out += '\n';
    };
    for (const auto& a : report.assets) {
        for (const auto& r : a.rows) {
            row(fig2, r, {r.mcap_usd, r.volume_daily, r.turnover_ratio});
            row(fig3, r, {r.coverage_ratio, r.circulation_rep, r.asset_value, r.liability_value});
            row(fig4, r, {r.turnover_ratio, r.peg_deviation_pct, r.volatility_daily});
        }
    }
    std::vector<std::filesystem::path> written{out_dir / kFig2File, out_dir / kFig3File, out_dir / kFig4File};
    write_text_file(written[0], fig2);
    write_text_file(written[1], fig3);
    write_text_file(written[2], fig4);
    return written;
}

}  // namespace pegscope
