#pragma once

#include <chrono>
#include <compare>
#include <string>
#include <string_view>

namespace pegscope {

/// Calendar day (UTC). Accepts ISO `YYYY-MM-DD` and table-style
/// `DD/MM/YYYY`; always renders as ISO.
class Date {
public:
    constexpr Date() = default;
    explicit constexpr Date(std::chrono::sys_days days) : days_(days) {}

    static Date from_ymd(int year, unsigned month, unsigned day);
    static Date parse(std::string_view text);
    static Date parse_iso(std::string_view text);

    std::string iso() const;
    /// `DD-MM-YYYY`, the form used by the remote history endpoint.
    std::string dmy_dashed() const;

    int year() const;
    unsigned month() const;
    unsigned day() const;

    std::chrono::sys_days sys_days() const { return days_; }

    Date operator+(int days) const { return Date{days_ + std::chrono::days{days}}; }
    Date operator-(int days) const { return Date{days_ - std::chrono::days{days}}; }
    /// Signed day difference.
    int operator-(const Date& other) const {
        return static_cast<int>((days_ - other.days_).count());
    }

    auto operator<=>(const Date&) const = default;

private:
    std::chrono::sys_days days_{};
};

}  // namespace pegscope
