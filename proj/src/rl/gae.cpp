#include "ballbot/rl/gae.hpp"

#include "ballbot/errors.hpp"

namespace ballbot::rl {

GaeResult gae(std::span<const double> rewards, std::span<const double> values,
              std::span<const std::uint8_t> terminal,
              std::span<const std::uint8_t> truncated,
              std::span<const double> bootstrap_values, double gamma, double lambda) {
  const std::size_t n = rewards.size();
  if (values.size() != n || terminal.size() != n || truncated.size() != n ||
      bootstrap_values.size() != n)
    throw InvalidParameter("gae: sequence lengths are misaligned");
  if (n == 0) return {};
  if (!terminal[n - 1] && !truncated[n - 1])
    throw InvalidParameter("gae: final transition must be terminal or truncated");

  GaeResult out;
  out.advantages.resize(n);
  out.returns.resize(n);
  double running = 0.0;
  for (std::size_t i = n; i-- > 0;) {
    double delta;
    if (terminal[i]) {
      delta = rewards[i] - values[i];
      running = delta;
    } else if (truncated[i]) {
      delta = rewards[i] + gamma * bootstrap_values[i] - values[i];
      running = delta;
    } else {
      delta = rewards[i] + gamma * values[i + 1] - values[i];
      running = delta + gamma * lambda * running;
    }
    out.advantages[i] = running;
    out.returns[i] = running + values[i];
  }
  return out;
}

}  // namespace ballbot::rl
