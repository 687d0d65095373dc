#pragma once

#include <array>
#include <cmath>
#include <random>

namespace ballbot::nn {

// Diagonal Gaussian over pre-squash coordinates u, pushed through a logistic
// sigmoid so actions land in (0,1)^3. Log-densities include the
// change-of-variables term -log(a(1-a)) per component.

inline constexpr double kHalfLog2Pi = 0.91893853320467274178;  // 0.5*ln(2*pi)
inline constexpr double kActionEps = 1e-6;

inline double sigmoid(double u) { return 1.0 / (1.0 + std::exp(-u)); }
inline double logit(double a) { return std::log(a) - std::log1p(-a); }

struct SquashedSample {
  std::array<double, 3> action;
  double log_prob;
};

template <typename T>
SquashedSample sample_squashed(const T* raw_mean, const T* log_std,
                               std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  SquashedSample out;
  out.log_prob = 0.0;
  for (int i = 0; i < 3; ++i) {
    const double mu = static_cast<double>(raw_mean[i]);
    const double ls = static_cast<double>(log_std[i]);
    const double sigma = std::exp(ls);
    const double u = mu + sigma * normal(rng);
    double a = sigmoid(u);
    a = std::clamp(a, kActionEps, 1.0 - kActionEps);
    out.action[i] = a;
    const double z = (u - mu) / sigma;
    out.log_prob += -0.5 * z * z - ls - kHalfLog2Pi - std::log(a * (1.0 - a));
  }
  return out;
}

template <typename T>
double log_prob_squashed(const T* raw_mean, const T* log_std,
                         const std::array<double, 3>& action) {
  double lp = 0.0;
  for (int i = 0; i < 3; ++i) {
    const double a = std::clamp(action[i], kActionEps, 1.0 - kActionEps);
    const double u = logit(a);
    const double mu = static_cast<double>(raw_mean[i]);
    const double ls = static_cast<double>(log_std[i]);
    const double z = (u - mu) / std::exp(ls);
    lp += -0.5 * z * z - ls - kHalfLog2Pi - std::log(a * (1.0 - a));
  }
  return lp;
}

// d log p / d raw_mean and d log p / d log_std for a fixed action; the
// squash correction does not depend on the parameters and drops out.
template <typename T>
void log_prob_grads(const T* raw_mean, const T* log_std,
                    const std::array<double, 3>& action, double* d_mean,
                    double* d_log_std) {
  for (int i = 0; i < 3; ++i) {
    const double a = std::clamp(action[i], kActionEps, 1.0 - kActionEps);
    const double u = logit(a);
    const double mu = static_cast<double>(raw_mean[i]);
    const double sigma = std::exp(static_cast<double>(log_std[i]));
    const double z = (u - mu) / sigma;
    d_mean[i] = z / sigma;
    d_log_std[i] = z * z - 1.0;
  }
}

// Entropy of the pre-squash Gaussian (analytic); the squashed entropy has no
// closed form, and this is the quantity the entropy bonus regularizes.
template <typename T>
double entropy_base(const T* log_std) {
  double h = 0.0;
  for (int i = 0; i < 3; ++i)
    h += static_cast<double>(log_std[i]) + kHalfLog2Pi + 0.5;
  return h;
}

}  // namespace ballbot::nn
