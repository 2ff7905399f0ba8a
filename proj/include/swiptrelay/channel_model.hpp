#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace swiptrelay {

// Finite alphabet of channel power gains with its probability mass function.
// Gains are strictly ascending and non-negative; every probability is
// positive and the pmf sums to one. Immutable once constructed.
class FiniteChannel {
 public:
  // Validates and stores the table. A pmf whose sum is within 1e-9 of one is
  // renormalized; anything further off is rejected. Throws
  // std::invalid_argument on any violation.
  FiniteChannel(std::vector<double> gains, std::vector<double> pmf);

  std::size_t size() const noexcept { return gains_.size(); }
  double gain(std::size_t i) const { return gains_.at(i); }
  double probability(std::size_t i) const { return pmf_.at(i); }
  std::span<const double> gains() const noexcept { return gains_; }
  std::span<const double> pmf() const noexcept { return pmf_; }

  double max_gain() const noexcept { return gains_.back(); }
  double min_gain() const noexcept { return gains_.front(); }

  // Sum of probability * gain.
  double mean() const noexcept;

  // Probability mass of indices >= i; tail_mass(size()) == 0.
  double tail_mass(std::size_t i) const { return tail_.at(i); }

 private:
  std::vector<double> gains_;
  std::vector<double> pmf_;
  std::vector<double> tail_;
};

FiniteChannel channel_from_table(std::vector<double> gains, std::vector<double> pmf);

// Equiprobable quantization of the unit-mean exponential distribution (the
// power gain of unit-mean Rayleigh fading). Bin i covers the quantile range
// [-ln(1 - i/n), -ln(1 - (i+1)/n)); each bin has probability exactly 1/n
// and is represented by its conditional mean, so the quantized mean is 1.
FiniteChannel quantize_equiprobable_exponential(int n_states);

// Bin edges used by quantize_equiprobable_exponential: n + 1 values, the
// last one +infinity.
std::vector<double> exponential_quantile_edges(int n_states);

}  // namespace swiptrelay
