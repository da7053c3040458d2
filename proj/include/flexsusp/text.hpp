#pragma once

#include <string>
#include <vector>

namespace flexsusp {

// Shortest "%.{digits}g" rendering; 17 digits round-trips every double.
std::string number(double x, int digits = 17);
std::string join(const std::vector<double>& xs, int digits = 17);

}  // namespace flexsusp
