#pragma once

#include <compare>
#include <optional>
#include <string>
#include <string_view>

namespace ctp {

/// Proleptic Gregorian calendar date. Only constructible through `make` or
/// `parse`, so every instance is a valid date.
class Date {
 public:
  static std::optional<Date> make(int year, int month, int day);

  /// ISO-8601 calendar date, "YYYY-MM-DD". A trailing time-of-day part
  /// ("T..." or " ...") is accepted and ignored.
  static std::optional<Date> parse(std::string_view text);

  int year() const noexcept { return year_; }
  int month() const noexcept { return month_; }
  int day() const noexcept { return day_; }

  /// Days since 1970-01-01.
  long days_since_epoch() const noexcept;
  static Date from_days_since_epoch(long days);

  std::string to_string() const;

  friend auto operator<=>(const Date&, const Date&) = default;
  friend bool operator==(const Date&, const Date&) = default;

 private:
  Date(int y, int m, int d) : year_(y), month_(m), day_(d) {}

  int year_ = 1970;
  int month_ = 1;
  int day_ = 1;
};

}  // namespace ctp
