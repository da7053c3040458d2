#include "flexsusp/text.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>

namespace flexsusp {

std::string number(double x, int digits) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  for (int d = digits < 17 ? digits : 1; d <= digits; ++d) {
    std::snprintf(buf, sizeof buf, "%.*g", d, x);
    if (d == digits || std::strtod(buf, nullptr) == x) break;
  }
  return buf;
}

std::string join(const std::vector<double>& xs, int digits) {
  std::string s;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) s += ' ';
    s += number(xs[i], digits);
  }
  return s;
}

}  // namespace flexsusp
