#include "support/generators.hpp"

#include <cmath>
#include <cstdlib>

namespace pegscope::testing {

double Gen::magnitude(double lo, double hi) { return std::exp(uniform(std::log(lo), std::log(hi))); }

std::string Gen::word(std::size_t max_len) {
    static const std::vector<std::string> pieces = {"a", "b", "z", "Q", "0", "7", " ", "_", "-", "/", "\"", "\\",
                                                    "\n", "\t", "\x01", "\xc3\xa9", "\xe2\x82\xac", "\xf0\x9f\x92\xb5"};
    std::string out;
    const auto n = integer(0, static_cast<long long>(max_len));
    for (long long i = 0; i < n; ++i) out += pick(pieces);
    return out;
}

Json Gen::json_value(int depth) {
    const long long kind = integer(0, depth > 0 ? 7 : 5);
    switch (kind) {
        case 0: return nullptr;
        case 1: return coin();
        case 2: return integer(-1'000'000'000'000LL, 1'000'000'000'000LL);
        case 3: {
            const double v = magnitude(1e-12, 1e15) * (coin() ? -1.0 : 1.0);
            return coin(0.2) ? std::round(v) : v;
        }
        case 4: return uniform(-2.0, 2.0);
        case 5: return word();
        case 6: {
            Json arr = Json::array();
            const auto n = integer(0, 4);
            for (long long i = 0; i < n; ++i) arr.push_back(json_value(depth - 1));
            return arr;
        }
        default: {
            Json obj = Json::object();
            const auto n = integer(0, 4);
            for (long long i = 0; i < n; ++i) obj[word(6)] = json_value(depth - 1);
            return obj;
        }
    }
}

MarketSnapshot Gen::snapshot(const AssetId& asset, Date date) {
    MarketSnapshot s;
    s.asset = asset;
    s.date = date;
    s.price_usd = uniform(0.85, 1.15);
    s.mcap_usd = magnitude(1e8, 2e11);
    s.volume_daily = coin(0.05) ? 0.0 : s.mcap_usd * uniform(0.0, 1.5);
    s.volatility_daily = coin(0.1) ? 0.0 : uniform(0.0, 15.0);
    return s;
}

IndicatorFinding Gen::finding() {
    IndicatorFinding f;
    f.indicator = static_cast<Indicator>(integer(0, 4));
    f.severity = static_cast<Severity>(integer(0, 2));
    // Coarse magnitudes so ties are common.
    f.magnitude = f.severity == Severity::normal ? 0.0 : static_cast<double>(integer(1, 4)) / 4.0;
    f.persistence_days = static_cast<int>(integer(0, 7));
    f.detail = word(4);
    return f;
}

namespace {

std::string group_thousands(const std::string& digits) {
    std::string out;
    const std::size_t n = digits.size();
    for (std::size_t i = 0; i < n; ++i) {
        if (i > 0 && (n - i) % 3 == 0) out += ',';
        out += digits[i];
    }
    return out;
}

std::string strip_leading_zeros(std::string s) {
    const auto first = s.find_first_not_of('0');
    return first == std::string::npos ? "0" : s.substr(first);
}

}  // namespace

RenderedAmount render_amount(Gen& g) {
    static const std::vector<std::string> prefixes = {"", "$", "US$", "USD ", "$ "};
    static const std::vector<std::pair<std::string, int>> units = {
        {"thousand", 3}, {"million", 6}, {"billion", 9}, {"trillion", 12}, {"bn", 9}, {"mn", 6}};
    RenderedAmount a;
    const std::string prefix = g.pick(prefixes);
    const long long style = g.integer(0, 3);
    if (style <= 2) {
        // Whole dollars or cents, plain or comma grouped.
        const std::string whole = std::to_string(g.integer(1, 999'999'999'999LL));
        const bool cents = style == 2;
        const std::string frac = cents ? std::to_string(g.integer(0, 9)) + std::to_string(g.integer(0, 9)) : "";
        const bool grouped = style == 1 || (cents && g.coin());
        a.text = prefix + (grouped ? group_thousands(whole) : whole) + (cents ? "." + frac : "");
        a.decimal = whole + (cents ? "." + frac : "");
    } else {
        const auto& [unit, exponent] = g.pick(units);
        const int frac_digits = static_cast<int>(g.integer(0, 3));
        std::string mantissa = std::to_string(g.integer(1, 999));
        std::string frac;
        for (int i = 0; i < frac_digits; ++i) frac += static_cast<char>('0' + g.integer(0, 9));
        if (frac_digits > 0 && frac.back() == '0') frac.back() = '5';
        const std::string sep = g.coin(0.8) ? " " : "";
        a.text = prefix + mantissa + (frac.empty() ? "" : "." + frac) + sep + unit;
        // exponent >= 3 >= frac_digits, so the value is a whole number.
        a.decimal = strip_leading_zeros(mantissa + frac + std::string(static_cast<std::size_t>(exponent - frac_digits), '0'));
    }
    a.value = std::strtod(a.decimal.c_str(), nullptr);
    return a;
}

SyntheticAttestation synthetic_attestation(Gen& g) {
    static const std::vector<std::string> asset_labels = {"Total assets", "Total reserve assets", "Reserve assets",
                                                          "TOTAL ASSETS", "total assets"};
    static const std::vector<std::string> liability_labels = {"Total liabilities", "Total liabilities to token holders",
                                                              "Liabilities", "TOTAL LIABILITIES"};
    static const std::vector<std::string> circulation_labels = {"Tokens in circulation", "Circulating supply",
                                                                "USDT in circulation", "Circulation",
                                                                "Stablecoins in circulation"};
    static const std::vector<std::string> separators = {": ", " ", " of ", " were ", " - ", ":"};
    static const std::vector<std::string> dates = {"31 March 2023", "March 31, 2023", "2023-03-31", "30/06/2022",
                                                   "1st Dec 2022", "Sept 30, 2023"};
    static const std::vector<std::string> noise = {
        "Independent accountants' report on the reserves report.",
        "Excess reserves represent 1.9% of the total.",
        "The issuer redeemed tokens at par throughout the period.",
        "All amounts are presented in US dollars.",
        "Cash and cash equivalents make up 85.5 % of reserves."};

    SyntheticAttestation s;
    RenderedAmount x = render_amount(g);
    RenderedAmount y = render_amount(g);
    if (x.value > y.value) std::swap(x, y);
    s.circulation = x;  // circulation <= liabilities
    s.liabilities = y;
    s.assets = render_amount(g);

    auto line = [&](const std::vector<std::string>& labels, const RenderedAmount& amount) {
        std::string out = g.pick(labels);
        if (g.coin(0.3)) out += " as of " + g.pick(dates);
        if (g.coin(0.2)) out += " increased 2.5% to";
        out += g.pick(separators) + amount.text;
        if (g.coin(0.4)) out += ".";
        return out;
    };
    std::vector<std::string> lines = {line(asset_labels, s.assets), line(liability_labels, s.liabilities),
                                      line(circulation_labels, s.circulation)};
    const auto extra = g.integer(0, 3);
    for (long long i = 0; i < extra; ++i) lines.push_back(g.pick(noise));
    if (g.coin()) lines.push_back("Report date: " + g.pick(dates));
    g.shuffle(lines);
    if (g.coin(0.5)) lines.push_back("Prepared by: Example Assurance LLP");
    for (const auto& l : lines) s.text += l + "\n";
    return s;
}

}  // namespace pegscope::testing
