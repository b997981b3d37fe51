#include "transmod/text.hpp"

#include "transmod/hash.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>

namespace transmod {

std::string format_double(double v) {
  if (std::isnan(v)) return "NA";
  char buf[40];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, p);
}

std::string format_fixed(double v, int digits) {
  if (std::isnan(v)) return "NA";
  char buf[64];
  int n = std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return std::string(buf, static_cast<std::size_t>(n));
}

namespace {
std::string_view trim(std::string_view s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}
}  // namespace

bool parse_double(std::string_view s, double& out) {
  s = trim(s);
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  const char* last = s.data() + s.size();
  auto [p, ec] = std::from_chars(s.data(), last, out);
  return ec == std::errc() && p == last;
}

bool parse_long(std::string_view s, long& out) {
  s = trim(s);
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  const char* last = s.data() + s.size();
  auto [p, ec] = std::from_chars(s.data(), last, out);
  return ec == std::errc() && p == last;
}

std::string join(const std::vector<std::string>& parts, const std::string& sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

}  // namespace transmod

namespace transmod {

std::string to_hex(std::uint64_t value) {
  static const char digits[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = digits[value & 0xF];
    value >>= 4;
  }
  return out;
}

}  // namespace transmod
