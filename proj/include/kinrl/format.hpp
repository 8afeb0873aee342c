#pragma once

#include <string>

namespace kinrl {

// Shortest round-trip decimal, '.' separator regardless of locale.
std::string format_number(double x);

// Fixed notation with `digits` decimals, '.' separator.
std::string format_fixed(double x, int digits);

}  // namespace kinrl
