#include "lrd/common.hpp"

#include <algorithm>
#include <cctype>
#include <string>

namespace lrd {

std::string_view to_string(Frequency frequency) {
  switch (frequency) {
    case Frequency::Daily:
      return "daily";
    case Frequency::Weekly:
      return "weekly";
    case Frequency::Monthly:
      return "monthly";
  }
  return "daily";
}

Frequency parse_frequency(std::string_view text) {
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "daily") return Frequency::Daily;
  if (lower == "weekly") return Frequency::Weekly;
  if (lower == "monthly") return Frequency::Monthly;
  throw InputError("unknown frequency '" + std::string(text) +
                   "' (valid: daily, weekly, monthly)");
}

}  // namespace lrd
