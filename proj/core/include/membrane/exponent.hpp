#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

#include <boost/rational.hpp>

namespace membrane {

// Exact rational exponent, e.g. a_k in eps^{a_k} or b in t = eps^{-b}.
class ExponentQ {
 public:
  ExponentQ() = default;
  ExponentQ(std::int64_t num, std::int64_t den = 1);

  // Accepts "p/q", integers and finite decimals ("0.5").
  static ExponentQ parse(std::string_view text);

  std::int64_t numerator() const { return value_.numerator(); }
  std::int64_t denominator() const { return value_.denominator(); }
  double to_double() const;
  std::string to_string() const;

  ExponentQ operator+(const ExponentQ& o) const;
  ExponentQ operator-(const ExponentQ& o) const;
  ExponentQ& operator+=(const ExponentQ& o);

  bool operator==(const ExponentQ& o) const { return value_ == o.value_; }
  std::strong_ordering operator<=>(const ExponentQ& o) const;

 private:
  explicit ExponentQ(boost::rational<std::int64_t> v) : value_(v) {}
  boost::rational<std::int64_t> value_{0};
};

}  // namespace membrane
