#pragma once

#include <span>
#include <string>

namespace rcndl {

// Six decimals, round-half-even on the exact binary value; never "-0.000000".
std::string fixed6(double value);

// "[0.240000, 0.060000, ...]"
std::string fixed6_list(std::span<const double> values);

}  // namespace rcndl
