#include "pegscope/ingestion.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <regex>
#include <set>
#include <sstream>

#include "pegscope/error.hpp"

namespace pegscope {
namespace {

std::vector<std::string_view> split(std::string_view text, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = text.find(sep, start);
        if (pos == std::string_view::npos) {
            out.push_back(text.substr(start));
            return out;
        }
        out.push_back(text.substr(start, pos - start));
        start = pos + 1;
    }
}

std::string_view strip_cr(std::string_view line) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    return line;
}

double parse_plain_decimal(std::string_view field, const char* column, std::size_t line) {
    double value = 0.0;
    const bool well_formed = !field.empty() && field.front() != '+' &&
                             field.find_first_not_of("0123456789.eE+-") == std::string_view::npos;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (!well_formed || ec != std::errc{} || ptr != field.data() + field.size() || !std::isfinite(value)) {
        throw ParseError("line " + std::to_string(line) + ": column " + column + " is not a plain decimal: '" +
                             std::string(field) + "'",
                         line);
    }
    return value;
}

const Json& require_key(const Json& object, const char* key, const std::string& where) {
    auto it = object.find(key);
    if (it == object.end()) throw ParseError(where + ": missing key '" + key + "'");
    return *it;
}

double require_number(const Json& object, const char* key, const std::string& where) {
    const Json& v = require_key(object, key, where);
    if (!v.is_number()) throw ParseError(where + ": key '" + key + "' must be a number");
    return v.get<double>();
}

std::string require_string(const Json& object, const char* key, const std::string& where) {
    const Json& v = require_key(object, key, where);
    if (!v.is_string()) throw ParseError(where + ": key '" + key + "' must be a string");
    return v.get<std::string>();
}

template <typename Fn>
auto rethrow_as_parse(const std::string& where, std::size_t index, Fn&& fn) {
    try {
        return fn();
    } catch (const Error& e) {
        throw ParseError(where + ": " + e.what(), index);
    } catch (const Json::exception& e) {
        throw ParseError(where + ": " + e.what(), index);
    }
}

}  // namespace

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

const char* to_string(MediaKind kind) noexcept {
    switch (kind) {
        case MediaKind::text: return "text";
        case MediaKind::structured: return "structured";
        case MediaKind::image_only: return "image_only";
    }
    return "unknown";
}

bool NewsItem::tagged(const AssetId& asset) const {
    return std::binary_search(asset_tags.begin(), asset_tags.end(), asset);
}

// Market CSV ------------------------------------------------------------

std::vector<MarketSnapshot> parse_market_csv(std::string_view text) {
    auto lines = split(text, '\n');
    if (lines.empty() || strip_cr(lines.front()) != kMarketCsvHeader) {
        throw ParseError("line 1: header must be exactly '" + std::string(kMarketCsvHeader) + "'", 1);
    }
    std::vector<MarketSnapshot> out;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const std::size_t lineno = i + 1;
        const auto line = strip_cr(lines[i]);
        if (line.empty()) {
            if (i + 1 == lines.size()) break;  // trailing newline
            throw ParseError("line " + std::to_string(lineno) + ": empty row", lineno);
        }
        const auto fields = split(line, ',');
        if (fields.size() != 6) {
            throw ParseError("line " + std::to_string(lineno) + ": expected 6 fields, got " +
                                 std::to_string(fields.size()),
                             lineno);
        }
        MarketSnapshot s;
        try {
            s.date = Date::parse_iso(fields[0]);
            s.asset = AssetId{fields[1]};
        } catch (const DomainError& e) {
            throw ParseError("line " + std::to_string(lineno) + ": " + e.what(), lineno);
        }
        s.price_usd = parse_plain_decimal(fields[2], "price_usd", lineno);
        s.mcap_usd = parse_plain_decimal(fields[3], "mcap_usd", lineno);
        s.volume_daily = parse_plain_decimal(fields[4], "volume_daily", lineno);
        s.volatility_daily = parse_plain_decimal(fields[5], "volatility_daily", lineno);
        try {
            s.validate();
        } catch (const DomainError& e) {
            throw ParseError("line " + std::to_string(lineno) + ": " + e.what(), lineno);
        }
        out.push_back(std::move(s));
    }
    std::stable_sort(out.begin(), out.end(), [](const MarketSnapshot& a, const MarketSnapshot& b) {
        return std::tie(a.asset, a.date) < std::tie(b.asset, b.date);
    });
    for (std::size_t i = 1; i < out.size(); ++i) {
        if (out[i].asset == out[i - 1].asset && out[i].date == out[i - 1].date) {
            throw IntegrityError("duplicate market row for " + out[i].asset.symbol() + " " + out[i].date.iso());
        }
    }
    return out;
}

std::vector<MarketSnapshot> load_market_csv(const std::filesystem::path& path) {
    const std::string text = read_file(path);
    try {
        return parse_market_csv(text);
    } catch (const ParseError& e) {
        throw ParseError(path.string() + ": " + e.what(), e.line());
    }
}

std::string write_market_csv(std::span<const MarketSnapshot> snapshots) {
    std::string out(kMarketCsvHeader);
    out += '\n';
    for (const auto& s : snapshots) {
        out += s.date.iso();
        out += ',';
        out += s.asset.symbol();
        for (double v : {s.price_usd, s.mcap_usd, s.volume_daily, s.volatility_daily}) {
            out += ',';
            out += shortest_decimal(v);
        }
        out += '\n';
    }
    return out;
}

Json snapshot_to_json(const MarketSnapshot& s) {
    return Json{{"asset", s.asset.symbol()},           {"date", s.date.iso()},
                {"price_usd", s.price_usd},            {"mcap_usd", s.mcap_usd},
                {"volume_daily", s.volume_daily},      {"volatility_daily", s.volatility_daily}};
}

MarketSnapshot snapshot_from_json(const Json& o) {
    const std::string where = "market snapshot";
    if (!o.is_object()) throw ParseError(where + ": expected an object");
    MarketSnapshot s;
    s.asset = AssetId{require_string(o, "asset", where)};
    s.date = Date::parse_iso(require_string(o, "date", where));
    s.price_usd = require_number(o, "price_usd", where);
    s.mcap_usd = require_number(o, "mcap_usd", where);
    s.volume_daily = require_number(o, "volume_daily", where);
    s.volatility_daily = require_number(o, "volatility_daily", where);
    s.validate();
    return s;
}

// Attestation records ---------------------------------------------------

DisclosureExtract attestation_from_json(const Json& r) {
    const std::string where = "attestation record";
    if (!r.is_object()) throw ParseError(where + ": expected an object");
    DisclosureExtract e;
    e.asset = AssetId{require_string(r, "asset", where)};
    e.report_date = Date::parse(require_string(r, "report_date", where));
    e.source_id = require_string(r, "source_id", where);
    const Json& extractable = require_key(r, "extractable", where);
    if (!extractable.is_boolean()) throw ParseError(where + ": key 'extractable' must be a boolean");
    if (auto it = r.find("auditor"); it != r.end() && !it->is_null()) {
        if (!it->is_string()) throw ParseError(where + ": key 'auditor' must be a string or null");
        e.auditor = it->get<std::string>();
    }
    if (extractable.get<bool>()) {
        e.figures = ReserveFigures{require_number(r, "circulation_rep", where),
                                   require_number(r, "asset_value", where),
                                   require_number(r, "liability_value", where)};
    } else {
        for (const char* key : {"circulation_rep", "asset_value", "liability_value"}) {
            if (auto it = r.find(key); it != r.end() && !it->is_null()) {
                throw ParseError(where + ": non-extractable record carries '" + key + "'");
            }
        }
    }
    e.validate();
    return e;
}

Json attestation_to_json(const DisclosureExtract& e) {
    Json r{{"asset", e.asset.symbol()},
           {"report_date", e.report_date.iso()},
           {"source_id", e.source_id},
           {"extractable", e.extractable()},
           {"auditor", e.auditor ? Json(*e.auditor) : Json(nullptr)}};
    if (e.figures) {
        r["circulation_rep"] = e.figures->circulation_rep;
        r["asset_value"] = e.figures->asset_value;
        r["liability_value"] = e.figures->liability_value;
    } else {
        r["circulation_rep"] = nullptr;
        r["asset_value"] = nullptr;
        r["liability_value"] = nullptr;
    }
    return r;
}

std::vector<DisclosureExtract> parse_attestation_records(std::string_view text) {
    Json doc;
    try {
        doc = Json::parse(text);
    } catch (const Json::parse_error& e) {
        throw ParseError(std::string("attestation records: invalid JSON: ") + e.what());
    }
    if (!doc.is_array()) throw ParseError("attestation records: top level must be an array");
    std::vector<DisclosureExtract> out;
    out.reserve(doc.size());
    for (std::size_t i = 0; i < doc.size(); ++i) {
        const std::string where = "record " + std::to_string(i);
        out.push_back(rethrow_as_parse(where, i, [&] { return attestation_from_json(doc[i]); }));
    }
    std::stable_sort(out.begin(), out.end(), [](const DisclosureExtract& a, const DisclosureExtract& b) {
        return std::tie(a.asset, a.report_date) < std::tie(b.asset, b.report_date);
    });
    for (std::size_t i = 1; i < out.size(); ++i) {
        if (out[i].asset == out[i - 1].asset && out[i].report_date == out[i - 1].report_date) {
            throw IntegrityError("duplicate attestation for " + out[i].asset.symbol() + " " +
                                 out[i].report_date.iso());
        }
    }
    return out;
}

std::vector<DisclosureExtract> load_attestation_records(const std::filesystem::path& path) {
    const std::string text = read_file(path);
    try {
        return parse_attestation_records(text);
    } catch (const ParseError& e) {
        throw ParseError(path.string() + ": " + e.what(), e.line());
    }
}

std::string write_attestation_records(std::span<const DisclosureExtract> records) {
    Json doc = Json::array();
    for (const auto& r : records) doc.push_back(attestation_to_json(r));
    return doc.dump(2) + "\n";
}

// News corpus -----------------------------------------------------------

std::string canonicalize_url(std::string_view url) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string_view::npos || scheme_end == 0) {
        throw DomainError("not an absolute URL: '" + std::string(url) + "'");
    }
    std::string out;
    for (char c : url.substr(0, scheme_end)) {
        if (!std::isalpha(static_cast<unsigned char>(c)) && c != '+' && c != '-' && c != '.') {
            throw DomainError("invalid URL scheme in '" + std::string(url) + "'");
        }
        out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
    out += "://";
    std::string_view rest = url.substr(scheme_end + 3);
    if (auto hash = rest.find('#'); hash != std::string_view::npos) rest = rest.substr(0, hash);
    const auto host_end = rest.find_first_of("/?");
    const auto host = rest.substr(0, host_end);
    if (host.empty()) throw DomainError("URL has no host: '" + std::string(url) + "'");
    for (char c : host) out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    if (host_end == std::string_view::npos) {
        out += '/';
    } else {
        if (rest[host_end] == '?') out += '/';
        out += rest.substr(host_end);
    }
    return out;
}

NewsItem news_from_json(const Json& o) {
    const std::string where = "news item";
    if (!o.is_object()) throw ParseError(where + ": expected an object");
    NewsItem item;
    item.url = canonicalize_url(require_string(o, "url", where));
    item.published_date = Date::parse(require_string(o, "published_date", where));
    item.headline = require_string(o, "headline", where);
    item.body_text = require_string(o, "body_text", where);
    const Json& tags = require_key(o, "asset_tags", where);
    if (!tags.is_array()) throw ParseError(where + ": key 'asset_tags' must be an array");
    for (const auto& t : tags) {
        if (!t.is_string()) throw ParseError(where + ": asset tags must be strings");
        item.asset_tags.emplace_back(t.get<std::string>());
    }
    std::sort(item.asset_tags.begin(), item.asset_tags.end());
    item.asset_tags.erase(std::unique(item.asset_tags.begin(), item.asset_tags.end()), item.asset_tags.end());
    return item;
}

Json news_to_json(const NewsItem& item) {
    Json tags = Json::array();
    for (const auto& t : item.asset_tags) tags.push_back(t.symbol());
    return Json{{"url", item.url},
                {"published_date", item.published_date.iso()},
                {"asset_tags", std::move(tags)},
                {"headline", item.headline},
                {"body_text", item.body_text}};
}

std::vector<NewsItem> parse_news_jsonl(std::string_view text) {
    std::vector<NewsItem> out;
    std::set<std::string> seen;
    const auto lines = split(text, '\n');
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const auto line = strip_cr(lines[i]);
        if (line.find_first_not_of(" \t") == std::string_view::npos) continue;
        const std::size_t lineno = i + 1;
        const std::string where = "line " + std::to_string(lineno);
        NewsItem item = rethrow_as_parse(where, lineno, [&] { return news_from_json(Json::parse(line)); });
        if (!seen.insert(item.url).second) throw IntegrityError(where + ": duplicate news URL " + item.url);
        out.push_back(std::move(item));
    }
    return out;
}

std::vector<NewsItem> load_news_jsonl(const std::filesystem::path& path) {
    const std::string text = read_file(path);
    try {
        return parse_news_jsonl(text);
    } catch (const ParseError& e) {
        throw ParseError(path.string() + ": " + e.what(), e.line());
    }
}

std::string write_news_jsonl(std::span<const NewsItem> items) {
    std::string out;
    for (const auto& item : items) {
        out += canonical_dump(news_to_json(item));
        out += '\n';
    }
    return out;
}

std::string news_summary(const NewsItem& item) {
    const std::string& body = item.body_text;
    std::size_t chars = 0;
    std::size_t i = 0;
    while (i < body.size() && chars < kSummaryChars) {
        const auto lead = static_cast<unsigned char>(body[i]);
        std::size_t len = 1;
        if (lead >= 0xF0) len = 4;
        else if (lead >= 0xE0) len = 3;
        else if (lead >= 0xC0) len = 2;
        i = std::min(body.size(), i + len);
        ++chars;
    }
    return body.substr(0, i);
}

// Disclosure extraction ---------------------------------------------------

namespace {

enum class Field { circulation, assets, liabilities };

constexpr std::string_view kMonths =
    "january|february|march|april|may|june|july|august|september|october|november|december|"
    "jan|feb|mar|apr|jun|jul|aug|sep|sept|oct|nov|dec";

const std::regex& date_mask() {
    static const std::regex re(
        std::string(R"(\b\d{4}-\d{2}-\d{2}\b|\b\d{1,2}/\d{1,2}/\d{2,4}\b|)") +
            R"(\b\d{1,2}(?:st|nd|rd|th)?\s+(?:)" + std::string(kMonths) + R"()\.?,?\s+\d{4}\b|)" +
            R"(\b(?:)" + std::string(kMonths) + R"()\.?\s+\d{1,2}(?:st|nd|rd|th)?,?\s+\d{4}\b)",
        std::regex::ECMAScript | std::regex::icase);
    return re;
}

// Group 1..3: label kinds; group 4: integer digits; group 5: fraction; group 6: unit.
const std::regex& token_pattern() {
    static const std::regex re(
        R"((total\s+(?:reserve\s+)?assets|reserve\s+assets|assets)|)"
        R"((total\s+liabilities|liabilities)|)"
        R"((in\s+circulation|circulating\s+supply|circulation)|)"
        R"((?:us\$|usd|\$)?\s*\b(\d{1,3}(?:,\d{3})+|\d+)(?:\.(\d+))?)"
        R"((?:\s*(thousand|million|billion|trillion|bn|mn)\b)?)",
        std::regex::ECMAScript | std::regex::icase);
    return re;
}

int unit_exponent(std::string unit) {
    std::transform(unit.begin(), unit.end(), unit.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (unit.empty()) return 0;
    if (unit == "thousand") return 3;
    if (unit == "million" || unit == "mn") return 6;
    if (unit == "billion" || unit == "bn") return 9;
    return 12;  // trillion
}

double amount_value(const std::string& integer_part, const std::string& fraction, const std::string& unit) {
    std::string digits;
    for (char c : integer_part) {
        if (c != ',') digits.push_back(c);
    }
    digits += fraction;
    const int exponent = unit_exponent(unit) - static_cast<int>(fraction.size());
    const std::string repr = digits + "e" + std::to_string(exponent);
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(repr.data(), repr.data() + repr.size(), value);
    if (ec != std::errc{} || !std::isfinite(value)) throw DomainError("amount out of range: " + repr);
    return value;
}

bool followed_by_percent(std::string_view line, std::size_t end) {
    while (end < line.size() && line[end] == ' ') ++end;
    return end < line.size() && line[end] == '%';
}

void scan_line(std::string_view line, std::map<Field, double>& found) {
    std::optional<Field> pending;
    const std::string text(line);
    for (auto it = std::sregex_iterator(text.begin(), text.end(), token_pattern()); it != std::sregex_iterator();
         ++it) {
        const auto& m = *it;
        if (m[1].matched) {
            pending = Field::assets;
        } else if (m[2].matched) {
            pending = Field::liabilities;
        } else if (m[3].matched) {
            pending = Field::circulation;
        } else if (m[4].matched) {
            const auto end = static_cast<std::size_t>(m.position(0) + m.length(0));
            if (!pending || followed_by_percent(line, end)) continue;
            found.try_emplace(*pending, amount_value(m[4].str(), m[5].str(), m[6].str()));
            pending.reset();
        }
    }
}

std::optional<std::string> find_auditor(const std::string& body) {
    static const std::regex re(R"((?:^|\n)\s*(?:auditor|prepared by|attested by)\s*:?\s*([^\n.;]+))",
                               std::regex::ECMAScript | std::regex::icase);
    std::smatch m;
    if (!std::regex_search(body, m, re)) return std::nullopt;
    std::string name = m[1].str();
    while (!name.empty() && std::isspace(static_cast<unsigned char>(name.back()))) name.pop_back();
    if (name.empty()) return std::nullopt;
    return name;
}

DisclosureExtract extract_text(const DisclosureDocument& doc) {
    const std::string body = doc.body.value_or("");
    const std::string masked = std::regex_replace(body, date_mask(), " ");
    std::map<Field, double> found;
    for (auto line : split(masked, '\n')) scan_line(line, found);

    const std::pair<Field, const char*> required[] = {
        {Field::circulation, "circulation_rep"},
        {Field::assets, "asset_value"},
        {Field::liabilities, "liability_value"},
    };
    for (const auto& [field, name] : required) {
        if (!found.count(field)) {
            throw ExtractionError("document " + doc.source_id + ": required field " + name + " not found", name);
        }
    }
    DisclosureExtract e;
    e.asset = doc.asset;
    e.report_date = doc.report_date;
    e.source_id = doc.source_id;
    e.auditor = find_auditor(body);
    e.figures = ReserveFigures{found[Field::circulation], found[Field::assets], found[Field::liabilities]};
    e.validate();
    return e;
}

}  // namespace

std::optional<double> parse_amount(std::string_view text) {
    const std::string s(text);
    std::smatch m;
    auto it = std::sregex_iterator(s.begin(), s.end(), token_pattern());
    for (; it != std::sregex_iterator(); ++it) {
        if ((*it)[4].matched) return amount_value((*it)[4].str(), (*it)[5].str(), (*it)[6].str());
    }
    return std::nullopt;
}

DisclosureExtract extract_disclosure(const DisclosureDocument& doc) {
    switch (doc.media_kind) {
        case MediaKind::image_only: {
            DisclosureExtract e;
            e.asset = doc.asset;
            e.report_date = doc.report_date;
            e.source_id = doc.source_id;
            return e;
        }
        case MediaKind::structured: {
            if (!doc.body) {
                throw ExtractionError("document " + doc.source_id + ": structured document has no body",
                                      "circulation_rep");
            }
            DisclosureExtract e;
            try {
                e = attestation_from_json(Json::parse(*doc.body));
            } catch (const Json::exception& ex) {
                throw ParseError("document " + doc.source_id + ": " + ex.what());
            }
            e.source_id = doc.source_id;
            return e;
        }
        case MediaKind::text:
            break;
    }
    return extract_text(doc);
}

}  // namespace pegscope
