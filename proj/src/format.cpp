#include "rcndl/format.hpp"

#include <cstdio>

namespace rcndl {

std::string fixed6(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", value);
  std::string s(buf);
  if (s == "-0.000000") s.erase(0, 1);
  return s;
}

std::string fixed6_list(std::span<const double> values) {
  std::string out = "[";
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (k) out += ", ";
    out += fixed6(values[k]);
  }
  return out + "]";
}

}  // namespace rcndl
