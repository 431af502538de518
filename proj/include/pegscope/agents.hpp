#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "pegscope/classifier.hpp"
#include "pegscope/error.hpp"
#include "pegscope/ingestion.hpp"
#include "pegscope/mcp.hpp"
#include "pegscope/store.hpp"

namespace pegscope {

enum class Stage { Thought, Code, Observation, Finalize };

const char* to_string(Stage stage) noexcept;

struct TraceStep {
    Stage stage = Stage::Thought;
    std::string content;
    std::vector<std::uint64_t> refs;  // ToolCallRecord seqs
};

/// Ordered audit log of one pipeline run: (Thought, Code, Observation)
/// cycles closed by exactly one Finalize.
struct ReasoningTrace {
    std::string run_id;
    std::vector<TraceStep> steps;

    void add(Stage stage, std::string content, std::vector<std::uint64_t> refs = {});
    bool finalized() const { return !steps.empty() && steps.back().stage == Stage::Finalize; }
    bool well_formed() const;
    Json to_json() const;
};

/// Pluggable reasoning engine for the analysis stage.
class ReasoningBackend {
public:
    virtual ~ReasoningBackend() = default;
    virtual std::string name() const = 0;
    /// Fingerprint of the backend's configuration; part of the run id.
    virtual std::string config_digest() const = 0;
    virtual AnalysisOutcome analyze(const DisclosureExtract& extract, const EventContext& ctx,
                                    mcp::ToolServer& tools) = 0;
};

/// Deterministic rule backend: classify() with frozen thresholds.
class RuleBackend final : public ReasoningBackend {
public:
    explicit RuleBackend(Thresholds thresholds = {}, ClassifyOptions options = {})
        : thresholds_(thresholds), options_(options) {}

    std::string name() const override { return "rules"; }
    std::string config_digest() const override;
    AnalysisOutcome analyze(const DisclosureExtract& extract, const EventContext& ctx,
                            mcp::ToolServer& tools) override;

    const Thresholds& thresholds() const { return thresholds_; }

private:
    Thresholds thresholds_;
    ClassifyOptions options_;
};

inline constexpr int kEventSpanDays = 3;

/// Disclosure agent. Image-only documents come back non-extractable;
/// extraction failures are recorded as an Observation and rethrown.
DisclosureExtract agent_disclosure(const DisclosureDocument& doc, ReasoningTrace& trace,
                                   std::vector<std::uint64_t> refs = {});

/// Event agent. Reads the +/-3-day window exclusively through market tool
/// calls. Throws ContextError when the report-day snapshot is missing.
EventContext agent_event(const AssetId& asset, Date report_date, mcp::ToolServer& tools, ReasoningTrace& trace);

/// Analysis agent. Appends Thought/Code/Observation and the Finalize step.
AnalysisOutcome agent_analysis(const DisclosureExtract& extract, const EventContext& ctx, ReasoningBackend& backend,
                               mcp::ToolServer& tools, ReasoningTrace& trace);

/// Run aborted at `stage`; the trace is closed with a Finalize step and,
/// when persistence is on, already written to the store.
class PipelineError : public Error {
public:
    PipelineError(ErrorKind cause, std::string stage, const std::string& message, ReasoningTrace trace)
        : Error(cause, message), stage_(std::move(stage)), trace_(std::move(trace)) {}

    const std::string& stage() const noexcept { return stage_; }
    const ReasoningTrace& trace() const noexcept { return trace_; }

private:
    std::string stage_;
    ReasoningTrace trace_;
};

struct PipelineResult {
    AnalysisOutcome outcome;
    ReasoningTrace trace;
    std::vector<mcp::ToolCallRecord> calls;
    DisclosureExtract extract;
    EventContext context;
};

struct PipelineOptions {
    /// Write outcome and trace records (needs a read-write store).
    bool persist = true;
};

std::string run_id_for(const AssetId& asset, Date report_date, const ReasoningBackend& backend);

/// disclosure -> event -> analysis for one attestation.
PipelineResult run_pipeline(Store& store, const AssetId& asset, Date report_date, ReasoningBackend& backend,
                            const PipelineOptions& options = {});

}  // namespace pegscope
