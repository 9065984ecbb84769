#include "membrane/exponent.hpp"

#include <charconv>

#include "membrane/error.hpp"

namespace membrane {

namespace {

std::int64_t parse_int(std::string_view s, std::string_view whole) {
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size())
    fail(ErrorCode::InvalidArgument, "not a rational number: '" + std::string(whole) + "'");
  return v;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

}  // namespace

ExponentQ::ExponentQ(std::int64_t num, std::int64_t den) {
  if (den == 0) fail(ErrorCode::InvalidArgument, "zero denominator");
  value_ = boost::rational<std::int64_t>(num, den);
}

ExponentQ ExponentQ::parse(std::string_view text) {
  const std::string_view s = trim(text);
  if (auto slash = s.find('/'); slash != std::string_view::npos) {
    return ExponentQ(parse_int(trim(s.substr(0, slash)), text),
                     parse_int(trim(s.substr(slash + 1)), text));
  }
  if (auto dot = s.find('.'); dot != std::string_view::npos) {
    std::string_view ip = s.substr(0, dot);
    std::string_view fp = s.substr(dot + 1);
    if (fp.empty() || fp.size() > 15 || fp.front() == '-' || fp.front() == '+')
      fail(ErrorCode::InvalidArgument, "not a rational number: '" + std::string(text) + "'");
    bool negative = !ip.empty() && ip.front() == '-';
    std::int64_t whole = (ip.empty() || ip == "-" || ip == "+") ? 0 : parse_int(ip, text);
    std::int64_t frac = parse_int(fp, text);
    std::int64_t den = 1;
    for (std::size_t i = 0; i < fp.size(); ++i) den *= 10;
    std::int64_t num = (whole < 0 ? -whole : whole) * den + frac;
    return ExponentQ(negative ? -num : num, den);
  }
  return ExponentQ(parse_int(s, text), 1);
}

double ExponentQ::to_double() const {
  return static_cast<double>(value_.numerator()) / static_cast<double>(value_.denominator());
}

std::string ExponentQ::to_string() const {
  if (value_.denominator() == 1) return std::to_string(value_.numerator());
  return std::to_string(value_.numerator()) + "/" + std::to_string(value_.denominator());
}

ExponentQ ExponentQ::operator+(const ExponentQ& o) const { return ExponentQ(value_ + o.value_); }
ExponentQ ExponentQ::operator-(const ExponentQ& o) const { return ExponentQ(value_ - o.value_); }
ExponentQ& ExponentQ::operator+=(const ExponentQ& o) {
  value_ += o.value_;
  return *this;
}

std::strong_ordering ExponentQ::operator<=>(const ExponentQ& o) const {
  if (value_ < o.value_) return std::strong_ordering::less;
  if (value_ == o.value_) return std::strong_ordering::equal;
  return std::strong_ordering::greater;
}

}  // namespace membrane
