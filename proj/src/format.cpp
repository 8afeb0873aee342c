#include "kinrl/format.hpp"

#include <array>
#include <charconv>

namespace kinrl {

std::string format_number(double x) {
    if (x == 0.0) return "0";  // folds -0
    std::array<char, 32> buf{};
    const auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), x);
    return std::string(buf.data(), ec == std::errc{} ? end : buf.data());
}

std::string format_fixed(double x, int digits) {
    std::array<char, 64> buf{};
    const auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), x, std::chars_format::fixed, digits);
    return std::string(buf.data(), ec == std::errc{} ? end : buf.data());
}

}  // namespace kinrl
