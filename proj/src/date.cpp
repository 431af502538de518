#include "pegscope/date.hpp"

#include <charconv>
#include <cstdio>

#include "pegscope/error.hpp"

namespace pegscope {
namespace {

template <typename Int>
bool parse_digits(std::string_view text, Int& out) {
    if (text.empty()) return false;
    for (char c : text) {
        if (c < '0' || c > '9') return false;
    }
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
    return ec == std::errc{} && ptr == text.data() + text.size();
}

}  // namespace

Date Date::from_ymd(int year, unsigned month, unsigned day) {
    std::chrono::year_month_day ymd{std::chrono::year{year}, std::chrono::month{month},
                                    std::chrono::day{day}};
    if (!ymd.ok()) {
        throw DomainError("invalid calendar date " + std::to_string(year) + "-" +
                          std::to_string(month) + "-" + std::to_string(day));
    }
    return Date{std::chrono::sys_days{ymd}};
}

Date Date::parse_iso(std::string_view text) {
    int y = 0;
    unsigned m = 0, d = 0;
    if (text.size() != 10 || text[4] != '-' || text[7] != '-' || !parse_digits(text.substr(0, 4), y) ||
        !parse_digits(text.substr(5, 2), m) || !parse_digits(text.substr(8, 2), d)) {
        throw DomainError("expected ISO date YYYY-MM-DD, got '" + std::string(text) + "'");
    }
    return from_ymd(y, m, d);
}

Date Date::parse(std::string_view text) {
    if (text.size() == 10 && text[2] == '/' && text[5] == '/') {
        int y = 0;
        unsigned m = 0, d = 0;
        if (!parse_digits(text.substr(0, 2), d) || !parse_digits(text.substr(3, 2), m) ||
            !parse_digits(text.substr(6, 4), y)) {
            throw DomainError("expected date DD/MM/YYYY, got '" + std::string(text) + "'");
        }
        return from_ymd(y, m, d);
    }
    return parse_iso(text);
}

int Date::year() const { return static_cast<int>(std::chrono::year_month_day{days_}.year()); }
unsigned Date::month() const {
    return static_cast<unsigned>(std::chrono::year_month_day{days_}.month());
}
unsigned Date::day() const { return static_cast<unsigned>(std::chrono::year_month_day{days_}.day()); }

std::string Date::iso() const {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", year(), month(), day());
    return buf;
}

std::string Date::dmy_dashed() const {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%02u-%02u-%04d", day(), month(), year());
    return buf;
}

}  // namespace pegscope
