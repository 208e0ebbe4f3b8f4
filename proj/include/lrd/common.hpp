#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace lrd {

/// Malformed or contract-violating input (bad files, violated preconditions).
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Numerical breakdown: degenerate data, non-finite state, singular systems.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Frequency { Daily, Weekly, Monthly };

std::string_view to_string(Frequency frequency);

/// Accepts "daily", "weekly", "monthly" (case-insensitive).
Frequency parse_frequency(std::string_view text);

}  // namespace lrd
