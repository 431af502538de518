#include "pegscope/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "pegscope/error.hpp"
#include "pegscope/ingestion.hpp"

namespace pegscope {
namespace {

struct Crossing {
    Severity severity = Severity::normal;
    double magnitude = 0.0;
};

// Upper-tail rule: observed above a threshold.
Crossing above(double observed, double suspicious, double abnormal) {
    if (observed > abnormal) return {Severity::abnormal, (observed - abnormal) / abnormal};
    if (observed > suspicious) return {Severity::suspicious, (observed - suspicious) / suspicious};
    return {};
}

std::string compare_text(const char* name, double observed, const char* op, const char* threshold_name,
                         double threshold) {
    return std::string(name) + " " + sig4(observed) + " " + op + " " + threshold_name + " " + sig4(threshold);
}

}  // namespace

std::string sig4(double value) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", value);
    return buf;
}

const char* to_string(Severity s) noexcept {
    switch (s) {
        case Severity::normal: return "normal";
        case Severity::suspicious: return "suspicious";
        case Severity::abnormal: return "abnormal";
    }
    return "unknown";
}

const char* to_string(Indicator i) noexcept {
    switch (i) {
        case Indicator::coverage: return "coverage";
        case Indicator::attestation_quality: return "attestation_quality";
        case Indicator::supply_gap: return "supply_gap";
        case Indicator::liquidity_stress: return "liquidity_stress";
        case Indicator::peg_stress: return "peg_stress";
    }
    return "unknown";
}

Severity severity_from_string(std::string_view s) {
    for (Severity v : {Severity::normal, Severity::suspicious, Severity::abnormal}) {
        if (s == to_string(v)) return v;
    }
    throw ParseError("unknown severity '" + std::string(s) + "'");
}

// Thresholds --------------------------------------------------------------

Thresholds Thresholds::from_json(const Json& o) {
    if (!o.is_object()) throw ConfigError("threshold configuration must be a JSON object");
    Thresholds t;
    const std::pair<const char*, double*> doubles[] = {
        {"coverage_abnormal", &t.coverage_abnormal},
        {"gap_suspicious", &t.gap_suspicious},
        {"gap_abnormal", &t.gap_abnormal},
        {"turnover_abnormal", &t.turnover_abnormal},
        {"turnover_suspicious", &t.turnover_suspicious},
        {"volatility_suspicious", &t.volatility_suspicious},
        {"peg_suspicious", &t.peg_suspicious},
        {"peg_abnormal", &t.peg_abnormal},
    };
    for (const auto& [key, value] : o.items()) {
        if (key == "staleness_days") {
            if (!value.is_number_integer()) throw ConfigError("staleness_days must be an integer");
            t.staleness_days = value.get<int>();
            continue;
        }
        auto it = std::find_if(std::begin(doubles), std::end(doubles),
                               [&](const auto& d) { return key == d.first; });
        if (it == std::end(doubles)) throw ConfigError("unknown threshold key '" + key + "'");
        if (!value.is_number()) throw ConfigError("threshold '" + key + "' must be a number");
        *it->second = value.get<double>();
    }
    t.validate();
    return t;
}

Thresholds Thresholds::load(const std::filesystem::path& path) {
    Json doc;
    try {
        doc = Json::parse(read_file(path));
    } catch (const Json::parse_error& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
    return from_json(doc);
}

Json Thresholds::to_json() const {
    return Json{{"coverage_abnormal", coverage_abnormal},
                {"gap_suspicious", gap_suspicious},
                {"gap_abnormal", gap_abnormal},
                {"turnover_abnormal", turnover_abnormal},
                {"turnover_suspicious", turnover_suspicious},
                {"volatility_suspicious", volatility_suspicious},
                {"peg_suspicious", peg_suspicious},
                {"peg_abnormal", peg_abnormal},
                {"staleness_days", staleness_days}};
}

std::string Thresholds::digest() const { return sha256_hex(canonical_dump(to_json())).substr(0, 16); }

void Thresholds::validate() const {
    for (double v : {coverage_abnormal, gap_suspicious, gap_abnormal, turnover_abnormal, turnover_suspicious,
                     volatility_suspicious, peg_suspicious, peg_abnormal}) {
        if (!std::isfinite(v) || v <= 0) throw ConfigError("thresholds must be finite and > 0");
    }
    if (staleness_days <= 0) throw ConfigError("staleness_days must be > 0");
    if (gap_suspicious > gap_abnormal) throw ConfigError("gap_suspicious must not exceed gap_abnormal");
    if (turnover_suspicious > turnover_abnormal) {
        throw ConfigError("turnover_suspicious must not exceed turnover_abnormal");
    }
    if (peg_suspicious > peg_abnormal) throw ConfigError("peg_suspicious must not exceed peg_abnormal");
}

// Findings ------------------------------------------------------------------

Json IndicatorFinding::to_json() const {
    return Json{{"indicator", to_string(indicator)},
                {"severity", to_string(severity)},
                {"magnitude", magnitude},
                {"persistence_days", persistence_days},
                {"detail", detail}};
}

Json AnalysisOutcome::to_json() const {
    Json findings_json = Json::array();
    for (const auto& f : findings) findings_json.push_back(f.to_json());
    return Json{{"asset", asset.symbol()},
                {"report_date", report_date.iso()},
                {"label", to_string(label)},
                {"findings", std::move(findings_json)},
                {"scope", scope},
                {"justification", justification}};
}

RuleEvaluation evaluate_rule(Indicator indicator, const RuleInputs& in, const Thresholds& t) {
    RuleEvaluation out;
    switch (indicator) {
        case Indicator::coverage: {
            if (in.coverage_ratio < t.coverage_abnormal) {
                out.severity = Severity::abnormal;
                out.magnitude = (t.coverage_abnormal - in.coverage_ratio) / t.coverage_abnormal;
                out.detail = compare_text("coverage_ratio", in.coverage_ratio, "<", "coverage_abnormal",
                                          t.coverage_abnormal);
            } else {
                out.detail = compare_text("coverage_ratio", in.coverage_ratio, ">=", "coverage_abnormal",
                                          t.coverage_abnormal);
            }
            break;
        }
        case Indicator::attestation_quality: {
            const double age = in.attestation_age_days;
            if (age > t.staleness_days) {
                out.severity = Severity::abnormal;
                out.magnitude = (age - t.staleness_days) / static_cast<double>(t.staleness_days);
                out.detail = "attestation age " + std::to_string(in.attestation_age_days) + " days > staleness_days " +
                             std::to_string(t.staleness_days);
            } else {
                out.detail = "attestation age " + std::to_string(in.attestation_age_days) + " days <= staleness_days " +
                             std::to_string(t.staleness_days);
            }
            break;
        }
        case Indicator::supply_gap: {
            const double gap = std::abs(in.supply_gap_pct);
            const auto c = above(gap, t.gap_suspicious, t.gap_abnormal);
            out.severity = c.severity;
            out.magnitude = c.magnitude;
            if (c.severity == Severity::abnormal) {
                out.detail = compare_text("|supply_gap_pct|", gap, ">", "gap_abnormal", t.gap_abnormal);
            } else if (c.severity == Severity::suspicious) {
                out.detail = compare_text("|supply_gap_pct|", gap, ">", "gap_suspicious", t.gap_suspicious);
            } else {
                out.detail = compare_text("|supply_gap_pct|", gap, "<=", "gap_suspicious", t.gap_suspicious);
            }
            break;
        }
        case Indicator::liquidity_stress: {
            if (in.turnover_ratio > t.turnover_abnormal) {
                out.severity = Severity::abnormal;
                out.magnitude = (in.turnover_ratio - t.turnover_abnormal) / t.turnover_abnormal;
                out.detail = compare_text("turnover_ratio", in.turnover_ratio, ">", "turnover_abnormal",
                                          t.turnover_abnormal);
            } else if (in.turnover_ratio > t.turnover_suspicious && in.volatility_daily > t.volatility_suspicious) {
                out.severity = Severity::suspicious;
                out.magnitude = (in.turnover_ratio - t.turnover_suspicious) / t.turnover_suspicious;
                out.detail = compare_text("turnover_ratio", in.turnover_ratio, ">", "turnover_suspicious",
                                          t.turnover_suspicious) +
                             " with " +
                             compare_text("volatility_daily", in.volatility_daily, ">", "volatility_suspicious",
                                          t.volatility_suspicious);
            } else {
                out.detail = "turnover_ratio " + sig4(in.turnover_ratio) + ", volatility_daily " +
                             sig4(in.volatility_daily) + " within limits";
            }
            break;
        }
        case Indicator::peg_stress: {
            const double dev = std::abs(in.peg_deviation_pct);
            const auto c = above(dev, t.peg_suspicious, t.peg_abnormal);
            out.severity = c.severity;
            out.magnitude = c.magnitude;
            if (c.severity == Severity::abnormal) {
                out.detail = compare_text("|peg_deviation_pct|", dev, ">", "peg_abnormal", t.peg_abnormal);
            } else if (c.severity == Severity::suspicious) {
                out.detail = compare_text("|peg_deviation_pct|", dev, ">", "peg_suspicious", t.peg_suspicious);
            } else {
                out.detail = compare_text("|peg_deviation_pct|", dev, "<=", "peg_suspicious", t.peg_suspicious);
            }
            break;
        }
    }
    return out;
}

RuleInputs rule_inputs(const ReserveFigures& figures, const MarketSnapshot& day, int attestation_age_days) {
    const AlignmentMetrics m = align(figures, day);
    RuleInputs in;
    in.coverage_ratio = m.coverage_ratio;
    in.attestation_age_days = attestation_age_days;
    in.supply_gap_pct = m.supply_gap_pct;
    in.turnover_ratio = compute_turnover(day);
    in.volatility_daily = day.volatility_daily;
    in.peg_deviation_pct = compute_peg_deviation(day.price_usd);
    return in;
}

void rank_findings(std::vector<IndicatorFinding>& findings) {
    std::sort(findings.begin(), findings.end(), [](const IndicatorFinding& a, const IndicatorFinding& b) {
        if (a.severity != b.severity) return a.severity > b.severity;
        if (a.magnitude != b.magnitude) return a.magnitude > b.magnitude;
        return a.indicator < b.indicator;
    });
}

namespace {

std::string render_justification(const AnalysisOutcome& o, const RuleInputs& in, const EventContext& ctx) {
    std::string text = o.asset.symbol() + " attestation " + o.report_date.iso() + " classified " +
                       to_string(o.label) + ".";
    if (o.scope == 0) {
        text += " No indicator crossed its threshold.";
    } else {
        text += " Triggered:";
        bool first = true;
        for (const auto& f : o.findings) {
            if (f.severity == Severity::normal) continue;
            text += first ? " " : "; ";
            first = false;
            text += std::string(to_string(f.indicator)) + " " + to_string(f.severity) + " (" + f.detail +
                    ", magnitude " + sig4(f.magnitude) + ", persistent on " + std::to_string(f.persistence_days) +
                    "/" + std::to_string(ctx.window.days_present) + " window days)";
        }
        text += ".";
    }
    text += " Report-day values: coverage_ratio " + sig4(in.coverage_ratio) + ", supply_gap_pct " +
            sig4(in.supply_gap_pct) + ", turnover_ratio " + sig4(in.turnover_ratio) + ", volatility_daily " +
            sig4(in.volatility_daily) + ", peg_deviation_pct " + sig4(in.peg_deviation_pct) + ".";
    if (ctx.report_day_ref != 0) text += " Market data from call #" + std::to_string(ctx.report_day_ref) + ".";
    return text;
}

}  // namespace

AnalysisOutcome classify(const DisclosureExtract& extract, const EventContext& ctx, const Thresholds& t,
                         const ClassifyOptions& options) {
    if (!extract.extractable()) {
        throw DomainError("classify requires an extractable attestation (" + extract.source_id + ")");
    }
    const Date as_of = options.as_of.value_or(ctx.report_date);
    const int age = as_of - extract.report_date;
    const RuleInputs report_day = rule_inputs(*extract.figures, ctx.report_day_snapshot, age);

    std::vector<RuleInputs> window_days;
    window_days.reserve(ctx.days.size());
    for (const auto& d : ctx.days) window_days.push_back(rule_inputs(*extract.figures, d, age));

    AnalysisOutcome out;
    out.asset = extract.asset;
    out.report_date = extract.report_date;
    for (Indicator indicator : kAllIndicators) {
        const RuleEvaluation eval = evaluate_rule(indicator, report_day, t);
        IndicatorFinding f;
        f.indicator = indicator;
        f.severity = eval.severity;
        f.magnitude = eval.severity == Severity::normal ? 0.0 : eval.magnitude;
        f.detail = eval.detail;
        f.persistence_days = static_cast<int>(std::count_if(window_days.begin(), window_days.end(), [&](const RuleInputs& d) {
            return evaluate_rule(indicator, d, t).severity != Severity::normal;
        }));
        if (f.severity > out.label) out.label = f.severity;
        if (f.severity != Severity::normal) ++out.scope;
        out.findings.push_back(std::move(f));
    }
    rank_findings(out.findings);
    out.justification = render_justification(out, report_day, ctx);
    return out;
}

std::vector<IndicatorFinding> market_findings(const MarketSnapshot& day, const Thresholds& t) {
    RuleInputs in;
    in.turnover_ratio = compute_turnover(day);
    in.volatility_daily = day.volatility_daily;
    in.peg_deviation_pct = compute_peg_deviation(day.price_usd);
    std::vector<IndicatorFinding> out;
    for (Indicator indicator : {Indicator::liquidity_stress, Indicator::peg_stress}) {
        const RuleEvaluation eval = evaluate_rule(indicator, in, t);
        out.push_back({indicator, eval.severity, eval.severity == Severity::normal ? 0.0 : eval.magnitude,
                       eval.severity == Severity::normal ? 0 : 1, eval.detail});
    }
    rank_findings(out);
    return out;
}

}  // namespace pegscope
