#pragma once

#include <cmath>
#include <compare>
#include <cstdint>
#include <cstdio>
#include <string>
#include <string_view>

#include "riskbench/error.hpp"

namespace riskbench {

/// US dollar amount in integer cents. All aggregation arithmetic stays here.
struct Cents {
  std::int64_t value = 0;

  constexpr Cents() = default;
  constexpr explicit Cents(std::int64_t v) : value(v) {}

  static constexpr Cents from_dollars(std::int64_t dollars) { return Cents{dollars * 100}; }

  constexpr double dollars() const { return static_cast<double>(value) / 100.0; }

  constexpr Cents& operator+=(Cents o) { value += o.value; return *this; }
  constexpr Cents& operator-=(Cents o) { value -= o.value; return *this; }
  friend constexpr Cents operator+(Cents a, Cents b) { return Cents{a.value + b.value}; }
  friend constexpr Cents operator-(Cents a, Cents b) { return Cents{a.value - b.value}; }
  friend constexpr auto operator<=>(Cents, Cents) = default;
};

/// Integer division rounded half-to-even. Denominator must be positive.
constexpr std::int64_t div_round_half_even(std::int64_t num, std::int64_t den) {
  std::int64_t q = num / den;
  std::int64_t r = num % den;
  if (r < 0) {  // normalise to floor division
    q -= 1;
    r += den;
  }
  const std::int64_t twice = 2 * r;
  if (twice > den || (twice == den && (q % 2 != 0))) q += 1;
  return q;
}

/// Rounds a floating cent amount half-to-even.
inline Cents round_cents(long double cents) {
  return Cents{static_cast<std::int64_t>(std::nearbyint(cents))};
}

/// "1234.50" style; the format used in every JSON and CSV output.
inline std::string format_usd(Cents c) {
  const bool negative = c.value < 0;
  const std::uint64_t mag = negative ? static_cast<std::uint64_t>(-(c.value + 1)) + 1
                                     : static_cast<std::uint64_t>(c.value);
  char buf[48];
  std::snprintf(buf, sizeof buf, "%s%llu.%02llu", negative ? "-" : "",
                static_cast<unsigned long long>(mag / 100),
                static_cast<unsigned long long>(mag % 100));
  return buf;
}

/// Parses a decimal dollar string ("90000", "90000.5", "90000.50") exactly.
inline Cents parse_usd(std::string_view text) {
  auto fail = [&] {
    return Error(ErrorCode::InvalidSchema, "invalid USD amount '" + std::string(text) + "'");
  };
  if (text.empty()) throw fail();
  bool negative = false;
  std::size_t i = 0;
  if (text[0] == '-') {
    negative = true;
    i = 1;
  }
  std::int64_t whole = 0;
  std::size_t digits = 0;
  for (; i < text.size() && text[i] != '.'; ++i) {
    if (text[i] < '0' || text[i] > '9') throw fail();
    whole = whole * 10 + (text[i] - '0');
    if (whole > 90'000'000'000'000'000LL / 100) throw fail();
    ++digits;
  }
  std::int64_t frac = 0;
  if (i < text.size()) {
    ++i;
    const std::size_t frac_digits = text.size() - i;
    if (frac_digits == 0 || frac_digits > 2) throw fail();
    for (; i < text.size(); ++i) {
      if (text[i] < '0' || text[i] > '9') throw fail();
      frac = frac * 10 + (text[i] - '0');
    }
    if (frac_digits == 1) frac *= 10;
  }
  if (digits == 0) throw fail();
  const std::int64_t cents = whole * 100 + frac;
  return Cents{negative ? -cents : cents};
}

}  // namespace riskbench
