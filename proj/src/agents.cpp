#include "pegscope/agents.hpp"

#include <algorithm>
#include <cstdio>

namespace pegscope {
namespace {

std::string g6(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

std::string join_refs(const std::vector<std::uint64_t>& refs) {
    std::string out;
    for (auto r : refs) {
        if (!out.empty()) out += ", ";
        out += "#" + std::to_string(r);
    }
    return out;
}

std::uint64_t last_seq(const mcp::ToolServer& tools) { return tools.log().empty() ? 0 : tools.log().back().seq; }

// Brings an interrupted (Thought, Code, Observation) cycle to its Observation.
void close_cycle(ReasoningTrace& trace, const std::string& failure) {
    if (trace.steps.empty()) return;
    const Stage last = trace.steps.back().stage;
    if (last == Stage::Thought) trace.add(Stage::Code, "(not executed)");
    if (last == Stage::Thought || last == Stage::Code) trace.add(Stage::Observation, "failed: " + failure);
}

}  // namespace

const char* to_string(Stage stage) noexcept {
    switch (stage) {
        case Stage::Thought: return "Thought";
        case Stage::Code: return "Code";
        case Stage::Observation: return "Observation";
        case Stage::Finalize: return "Finalize";
    }
    return "unknown";
}

void ReasoningTrace::add(Stage stage, std::string content, std::vector<std::uint64_t> refs) {
    steps.push_back({stage, std::move(content), std::move(refs)});
}

bool ReasoningTrace::well_formed() const {
    if (steps.empty() || steps.back().stage != Stage::Finalize) return false;
    const std::size_t body = steps.size() - 1;
    if (body % 3 != 0) return false;
    static constexpr Stage kCycle[] = {Stage::Thought, Stage::Code, Stage::Observation};
    for (std::size_t i = 0; i < body; ++i) {
        if (steps[i].stage != kCycle[i % 3]) return false;
    }
    return true;
}

Json ReasoningTrace::to_json() const {
    Json s = Json::array();
    for (const auto& step : steps) {
        s.push_back(Json{{"stage", to_string(step.stage)}, {"content", step.content}, {"refs", step.refs}});
    }
    return Json{{"run_id", run_id}, {"steps", std::move(s)}};
}

std::string RuleBackend::config_digest() const { return thresholds_.digest(); }

AnalysisOutcome RuleBackend::analyze(const DisclosureExtract& extract, const EventContext& ctx, mcp::ToolServer&) {
    return classify(extract, ctx, thresholds_, options_);
}

DisclosureExtract agent_disclosure(const DisclosureDocument& doc, ReasoningTrace& trace,
                                   std::vector<std::uint64_t> refs) {
    trace.add(Stage::Thought,
              "Extract reserve and liability figures from " + std::string(to_string(doc.media_kind)) +
                  " attestation " + doc.source_id + " (" + doc.asset.symbol() + ", " + doc.report_date.iso() + ").",
              refs);
    trace.add(Stage::Code, "extract_disclosure(source_id=" + doc.source_id + ", media_kind=" +
                               to_string(doc.media_kind) + ")",
              refs);
    DisclosureExtract extract;
    try {
        extract = extract_disclosure(doc);
    } catch (const Error& e) {
        trace.add(Stage::Observation, std::string("extraction failed: ") + e.what(), refs);
        throw;
    }
    if (!extract.extractable()) {
        trace.add(Stage::Observation,
                  "image-only document: no extractable figures; excluded from classification", refs);
        return extract;
    }
    const auto& f = *extract.figures;
    trace.add(Stage::Observation,
              "circulation_rep " + g6(f.circulation_rep) + ", asset_value " + g6(f.asset_value) +
                  ", liability_value " + g6(f.liability_value) + ", auditor " + extract.auditor.value_or("n/a"),
              refs);
    return extract;
}

EventContext agent_event(const AssetId& asset, Date report_date, mcp::ToolServer& tools, ReasoningTrace& trace) {
    const Date lo = report_date - kEventSpanDays;
    const Date hi = report_date + kEventSpanDays;
    trace.add(Stage::Thought, "Collect " + asset.symbol() + " market snapshots for " + lo.iso() + ".." + hi.iso() +
                                  " (report date +/- " + std::to_string(kEventSpanDays) + " days).");
    const auto tool = mcp::market_tool_for(asset);
    if (!tool) {
        trace.add(Stage::Code, "(no market tool)");
        trace.add(Stage::Observation, "no market tool serves asset " + asset.symbol());
        throw ContextError("no market tool serves asset " + asset.symbol());
    }
    trace.add(Stage::Code, std::string(*tool) + "(date=d) for d in " + lo.iso() + ".." + hi.iso());

    EventContext ctx;
    ctx.asset = asset;
    ctx.report_date = report_date;
    std::vector<std::string> missing;
    bool have_report_day = false;
    for (Date d = lo; d <= hi; d = d + 1) {
        const mcp::ToolResult r = tools.call(*tool, Json{{"date", d.iso()}});
        const std::uint64_t seq = last_seq(tools);
        ctx.call_refs.push_back(seq);
        if (r.is_error) {
            missing.push_back(d.iso());
            continue;
        }
        MarketSnapshot s;
        s.asset = asset;
        s.date = d;
        s.price_usd = r.content.at("price_usd").get<double>();
        s.mcap_usd = r.content.at("mcap_usd").get<double>();
        s.volume_daily = r.content.at("volume_usd").get<double>();
        s.volatility_daily = r.content.at("volatility_daily").get<double>();
        if (d == report_date) {
            ctx.report_day_snapshot = s;
            ctx.report_day_ref = seq;
            have_report_day = true;
        }
        ctx.days.push_back(s);
    }

    if (!have_report_day) {
        trace.add(Stage::Observation, "report-day snapshot " + report_date.iso() + " is missing", ctx.call_refs);
        throw ContextError("missing report-day snapshot for " + asset.symbol() + " " + report_date.iso());
    }
    try {
        ctx.window = aggregate_window(ctx.days, report_date, kEventSpanDays);
        ctx.report_day_derived = derive(ctx.report_day_snapshot);
    } catch (const Error& e) {
        trace.add(Stage::Observation, std::string("window aggregation failed: ") + e.what(), ctx.call_refs);
        throw;
    }

    std::string obs = std::to_string(ctx.window.days_present) + "/" + std::to_string(2 * kEventSpanDays + 1) +
                      " days present";
    if (!missing.empty()) {
        obs += " (missing";
        for (const auto& m : missing) obs += " " + m;
        obs += ")";
    }
    obs += "; report day: price_usd " + g6(ctx.report_day_snapshot.price_usd) + ", mcap_usd " +
           g6(ctx.report_day_snapshot.mcap_usd) + ", turnover_ratio " + g6(ctx.report_day_derived.turnover_ratio) +
           ", peg_deviation_pct " + g6(ctx.report_day_derived.peg_deviation_pct) + "; window: mean_turnover " +
           g6(ctx.window.mean_turnover) + ", max_abs_peg_dev_pct " + g6(ctx.window.max_abs_peg_dev_pct) +
           ", mcap_change " + g6(ctx.window.mcap_change);
    trace.add(Stage::Observation, std::move(obs), ctx.call_refs);
    return ctx;
}

AnalysisOutcome agent_analysis(const DisclosureExtract& extract, const EventContext& ctx, ReasoningBackend& backend,
                               mcp::ToolServer& tools, ReasoningTrace& trace) {
    trace.add(Stage::Thought, "Rank coverage, attestation quality, supply gap, liquidity and peg indicators for " +
                                  extract.asset.symbol() + " " + extract.report_date.iso() + ".");
    trace.add(Stage::Code, backend.name() + ".analyze(extract=" + extract.source_id + ", window=" +
                               ctx.window.first_date().iso() + ".." + ctx.window.last_date().iso() + ")");
    if (!extract.extractable()) {
        trace.add(Stage::Observation, "refused: attestation is not extractable");
        throw DomainError("analysis requires an extractable attestation");
    }
    AnalysisOutcome outcome;
    try {
        outcome = backend.analyze(extract, ctx, tools);
    } catch (const std::exception& e) {
        trace.add(Stage::Observation, std::string("backend failed: ") + e.what());
        throw AnalysisError(std::string("backend ") + backend.name() + " failed: " + e.what());
    }
    std::string obs = "scope " + std::to_string(outcome.scope) + ";";
    for (const auto& f : outcome.findings) {
        obs += std::string(" ") + to_string(f.indicator) + "=" + to_string(f.severity) + "(" + sig4(f.magnitude) + ")";
    }
    trace.add(Stage::Observation, std::move(obs));

    std::vector<std::uint64_t> refs;
    for (const auto& rec : tools.log()) {
        if (rec.tool == mcp::kAttestationDocument) refs.push_back(rec.seq);
    }
    if (ctx.report_day_ref != 0) refs.push_back(ctx.report_day_ref);
    std::sort(refs.begin(), refs.end());
    trace.add(Stage::Finalize, std::string("label ") + to_string(outcome.label) + ". " + outcome.justification,
              std::move(refs));
    return outcome;
}

std::string run_id_for(const AssetId& asset, Date report_date, const ReasoningBackend& backend) {
    return sha256_hex(asset.symbol() + "|" + report_date.iso() + "|" + backend.name() + "|" + backend.config_digest())
        .substr(0, 16);
}

namespace {

Json trace_record(const ReasoningTrace& trace, const AssetId& asset, Date date, const ReasoningBackend& backend,
                  const mcp::ToolServer& tools, const std::string& status, const std::string& stage) {
    Json calls = Json::array();
    for (const auto& rec : tools.log()) calls.push_back(rec.to_json(false));
    Json j = trace.to_json();
    j["asset"] = asset.symbol();
    j["report_date"] = date.iso();
    j["backend"] = backend.name();
    j["config_digest"] = backend.config_digest();
    j["status"] = status;
    j["failed_stage"] = stage.empty() ? Json(nullptr) : Json(stage);
    j["calls"] = std::move(calls);
    return j;
}

RecordKey run_key(Namespace ns, const AssetId& asset, Date date, const std::string& run_id) {
    return {ns, {asset.symbol(), date.iso(), run_id}};
}

}  // namespace

PipelineResult run_pipeline(Store& store, const AssetId& asset, Date report_date, ReasoningBackend& backend,
                            const PipelineOptions& options) {
    mcp::ToolServer tools(store);
    ReasoningTrace trace;
    trace.run_id = run_id_for(asset, report_date, backend);

    auto abort = [&](const std::string& stage, ErrorKind kind, const std::string& message) -> PipelineError {
        close_cycle(trace, message);
        trace.add(Stage::Finalize, "aborted at " + stage + " stage: " + message);
        if (options.persist) {
            store.put(run_key(Namespace::trace, asset, report_date, trace.run_id),
                      trace_record(trace, asset, report_date, backend, tools, "aborted", stage));
        }
        return PipelineError(kind, stage, asset.symbol() + " " + report_date.iso() + ": " + message, trace);
    };

    // Retrieval through the document channel.
    trace.add(Stage::Thought, "Retrieve the " + asset.symbol() + " attestation dated " + report_date.iso() + ".");
    trace.add(Stage::Code, std::string(mcp::kAttestationDocument) + "(asset=" + asset.symbol() +
                               ", report_date=" + report_date.iso() + ")");
    const mcp::ToolResult record = tools.read_attestation(asset, report_date);
    const std::vector<std::uint64_t> doc_refs{last_seq(tools)};
    if (record.is_error) {
        trace.add(Stage::Observation, "attestation not found", doc_refs);
        throw abort("disclosure", ErrorKind::not_found, "attestation not found");
    }
    DisclosureDocument doc;
    doc.asset = asset;
    doc.report_date = report_date;
    doc.source_id = record.content.value("source_id", "");
    if (record.content.value("extractable", false)) {
        doc.media_kind = MediaKind::structured;
        doc.body = canonical_dump(record.content);
    } else {
        doc.media_kind = MediaKind::image_only;
    }
    trace.add(Stage::Observation,
              "document " + doc.source_id + " (" + to_string(doc.media_kind) + ") via " + join_refs(doc_refs),
              doc_refs);

    DisclosureExtract extract;
    try {
        extract = agent_disclosure(doc, trace, doc_refs);
    } catch (const Error& e) {
        throw abort("disclosure", e.kind(), e.what());
    }
    if (!extract.extractable()) {
        throw abort("disclosure", ErrorKind::extraction, "image-only document excluded from classification");
    }

    EventContext ctx;
    try {
        ctx = agent_event(asset, report_date, tools, trace);
    } catch (const Error& e) {
        throw abort("event", e.kind(), e.what());
    }

    AnalysisOutcome outcome;
    try {
        outcome = agent_analysis(extract, ctx, backend, tools, trace);
    } catch (const Error& e) {
        throw abort("analysis", e.kind(), e.what());
    }

    if (options.persist) {
        Json record_json = outcome.to_json();
        record_json["run_id"] = trace.run_id;
        record_json["backend"] = backend.name();
        record_json["config_digest"] = backend.config_digest();
        store.put(run_key(Namespace::outcome, asset, report_date, trace.run_id), record_json);
        store.put(run_key(Namespace::trace, asset, report_date, trace.run_id),
                  trace_record(trace, asset, report_date, backend, tools, "completed", ""));
    }
    return {std::move(outcome), std::move(trace), tools.log(), std::move(extract), std::move(ctx)};
}

}  // namespace pegscope
