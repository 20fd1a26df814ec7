#pragma once

#include <charconv>
#include <compare>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>

namespace exrec {

/// UTC instant with millisecond resolution, as used by the dump's
/// CreationDate attribute ("2009-02-18T14:05:31.123").
class Timestamp {
 public:
  constexpr Timestamp() = default;
  constexpr explicit Timestamp(std::int64_t millis) : millis_(millis) {}

  constexpr std::int64_t millis() const noexcept { return millis_; }
  constexpr auto operator<=>(const Timestamp&) const = default;

  /// Accepts "YYYY-MM-DD", "YYYY-MM-DDTHH:MM:SS" and an optional fraction
  /// of up to three digits. Returns nullopt on anything else.
  static std::optional<Timestamp> parse(std::string_view s) {
    auto num = [&](std::size_t pos, std::size_t len, int& out) {
      if (pos + len > s.size()) return false;
      auto first = s.data() + pos;
      auto [p, ec] = std::from_chars(first, first + len, out);
      return ec == std::errc{} && p == first + len;
    };
    int y = 0, mo = 0, d = 0, h = 0, mi = 0, sec = 0, ms = 0;
    if (s.size() < 10 || s[4] != '-' || s[7] != '-') return std::nullopt;
    if (!num(0, 4, y) || !num(5, 2, mo) || !num(8, 2, d)) return std::nullopt;
    if (s.size() > 10) {
      if (s.size() < 19 || (s[10] != 'T' && s[10] != ' ') || s[13] != ':' ||
          s[16] != ':')
        return std::nullopt;
      if (!num(11, 2, h) || !num(14, 2, mi) || !num(17, 2, sec))
        return std::nullopt;
      if (s.size() > 19) {
        std::size_t digits = s.size() - 20;
        if (s[19] != '.' || digits == 0 || digits > 3 || !num(20, digits, ms))
          return std::nullopt;
        for (std::size_t i = digits; i < 3; ++i) ms *= 10;
      }
    }
    if (mo < 1 || mo > 12 || d < 1 || d > 31 || h > 23 || mi > 59 || sec > 60)
      return std::nullopt;
    std::int64_t days = days_from_civil(y, static_cast<unsigned>(mo),
                                        static_cast<unsigned>(d));
    std::int64_t secs = days * 86400 + h * 3600 + mi * 60 + sec;
    return Timestamp(secs * 1000 + ms);
  }

  /// Always "YYYY-MM-DDTHH:MM:SS.mmm".
  std::string to_string() const {
    std::int64_t ms = millis_ % 1000;
    std::int64_t secs = millis_ / 1000;
    if (ms < 0) {
      ms += 1000;
      secs -= 1;
    }
    std::int64_t days = secs / 86400;
    std::int64_t rem = secs % 86400;
    if (rem < 0) {
      rem += 86400;
      days -= 1;
    }
    auto [y, m, d] = civil_from_days(days);
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04lld-%02u-%02uT%02lld:%02lld:%02lld.%03lld",
                  static_cast<long long>(y), m, d,
                  static_cast<long long>(rem / 3600),
                  static_cast<long long>(rem % 3600 / 60),
                  static_cast<long long>(rem % 60), static_cast<long long>(ms));
    return buf;
  }

 private:
  // Howard Hinnant's civil calendar algorithms.
  static constexpr std::int64_t days_from_civil(std::int64_t y, unsigned m,
                                                unsigned d) noexcept {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
  }

  struct Civil {
    std::int64_t y;
    unsigned m, d;
  };

  static constexpr Civil civil_from_days(std::int64_t z) noexcept {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    const unsigned d = doy - (153 * mp + 2) / 5 + 1;
    const unsigned m = mp < 10 ? mp + 3 : mp - 9;
    return {y + (m <= 2), m, d};
  }

  std::int64_t millis_ = 0;
};

}  // namespace exrec
