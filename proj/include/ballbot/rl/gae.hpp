#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace ballbot::rl {

struct GaeResult {
  std::vector<double> advantages;
  std::vector<double> returns;  // advantages + values
};

// Generalized advantage estimation over one environment's transition
// sequence. terminal[t] marks failure (bootstraps 0); truncated[t] marks a
// horizon cut (bootstraps bootstrap_values[t]). The final transition must be
// terminal or truncated. Advantages never flow across episode boundaries.
GaeResult gae(std::span<const double> rewards, std::span<const double> values,
              std::span<const std::uint8_t> terminal,
              std::span<const std::uint8_t> truncated,
              std::span<const double> bootstrap_values, double gamma, double lambda);

}  // namespace ballbot::rl
