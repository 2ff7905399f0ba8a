#include "swiptrelay/channel_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace swiptrelay {

namespace {

constexpr double kPmfSumTolerance = 1e-9;

}  // namespace

FiniteChannel::FiniteChannel(std::vector<double> gains, std::vector<double> pmf)
    : gains_(std::move(gains)), pmf_(std::move(pmf)) {
  if (gains_.empty()) {
    throw std::invalid_argument("channel: empty gain table");
  }
  if (gains_.size() != pmf_.size()) {
    throw std::invalid_argument("channel: gains and pmf differ in length");
  }
  for (std::size_t i = 0; i < gains_.size(); ++i) {
    if (!std::isfinite(gains_[i]) || gains_[i] < 0.0) {
      throw std::invalid_argument("channel: gain " + std::to_string(i) +
                                  " is negative or not finite");
    }
    if (i > 0 && !(gains_[i] > gains_[i - 1])) {
      throw std::invalid_argument("channel: gains are not strictly ascending at index " +
                                  std::to_string(i));
    }
    if (!std::isfinite(pmf_[i]) || !(pmf_[i] > 0.0)) {
      throw std::invalid_argument("channel: probability " + std::to_string(i) +
                                  " is not positive");
    }
  }
  const double sum = std::accumulate(pmf_.begin(), pmf_.end(), 0.0);
  if (std::abs(sum - 1.0) > kPmfSumTolerance) {
    throw std::invalid_argument("channel: pmf sums to " + std::to_string(sum) + ", not 1");
  }
  if (sum != 1.0) {
    for (double& p : pmf_) p /= sum;
  }
  tail_.assign(pmf_.size() + 1, 0.0);
  for (std::size_t i = pmf_.size(); i-- > 0;) {
    tail_[i] = std::min(1.0, tail_[i + 1] + pmf_[i]);
  }
  // Full support has mass one exactly; summation drift must not push it past.
  tail_[0] = 1.0;
}

double FiniteChannel::mean() const noexcept {
  double m = 0.0;
  for (std::size_t i = 0; i < gains_.size(); ++i) m += pmf_[i] * gains_[i];
  return m;
}

FiniteChannel channel_from_table(std::vector<double> gains, std::vector<double> pmf) {
  return FiniteChannel(std::move(gains), std::move(pmf));
}

std::vector<double> exponential_quantile_edges(int n_states) {
  if (n_states < 1) {
    throw std::invalid_argument("quantizer: number of states must be positive");
  }
  const auto n = static_cast<double>(n_states);
  std::vector<double> edges(static_cast<std::size_t>(n_states) + 1);
  for (int i = 0; i < n_states; ++i) {
    edges[static_cast<std::size_t>(i)] = -std::log1p(-static_cast<double>(i) / n);
  }
  edges.back() = std::numeric_limits<double>::infinity();
  return edges;
}

FiniteChannel quantize_equiprobable_exponential(int n_states) {
  const std::vector<double> edges = exponential_quantile_edges(n_states);
  const auto n = static_cast<std::size_t>(n_states);
  std::vector<double> gains(n);
  std::vector<double> pmf(n, 1.0 / static_cast<double>(n_states));
  for (std::size_t i = 0; i < n; ++i) {
    const double a = edges[i];
    const double b = edges[i + 1];
    if (std::isinf(b)) {
      gains[i] = a + 1.0;
    } else {
      // E[X | a <= X < b] = a + 1 - d / (e^d - 1), d = b - a; the
      // expm1 form avoids cancellation on the narrow low-gain bins.
      const double d = b - a;
      gains[i] = a + 1.0 - d / std::expm1(d);
    }
  }
  return FiniteChannel(std::move(gains), std::move(pmf));
}

}  // namespace swiptrelay
