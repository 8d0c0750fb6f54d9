#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace hinscreen {

// Calendar date without time of day, stored as days since 1970-01-01.
// Differences and offsets are plain day counts, so window arithmetic like
// "31 days before the cutoff" is exact integer math.
class Date {
 public:
  Date() = default;

  // Throws std::invalid_argument on an impossible calendar date.
  static Date from_ymd(int year, int month, int day);

  // Parses "YYYY-MM-DD". Returns nullopt on malformed text or an
  // impossible date; callers turn that into per-record errors.
  static std::optional<Date> parse(std::string_view text);

  static Date from_days(std::int64_t days) {
    Date d;
    d.days_ = days;
    return d;
  }

  std::int64_t days() const { return days_; }
  Date plus_days(std::int64_t n) const { return from_days(days_ + n); }

  std::string to_string() const;  // "YYYY-MM-DD"

  friend auto operator<=>(const Date&, const Date&) = default;

 private:
  std::int64_t days_ = 0;
};

inline std::int64_t operator-(const Date& a, const Date& b) {
  return a.days() - b.days();
}

}  // namespace hinscreen
