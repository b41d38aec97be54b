#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

namespace cqed::detail {

inline double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  if (v.size() % 2 == 1) return *mid;
  const double upper = *mid;
  const double lower = *std::max_element(v.begin(), mid);
  return 0.5 * (lower + upper);
}

// Robust white-noise standard deviation from first differences (MAD based).
inline double noise_sigma(const std::vector<double>& y) {
  if (y.size() < 3) return 0.0;
  std::vector<double> d(y.size() - 1);
  for (std::size_t i = 0; i + 1 < y.size(); ++i) d[i] = std::abs(y[i + 1] - y[i]);
  return 1.4826 * median(std::move(d)) / std::numbers::sqrt2;
}

// RMS of complex white noise, sqrt(E|n|^2), from first differences: |d|^2 is
// exponential with mean 2 sigma^2, so its median is 2 ln2 sigma^2.
inline double complex_noise_rms(const std::vector<std::complex<double>>& z) {
  if (z.size() < 3) return 0.0;
  std::vector<double> d(z.size() - 1);
  for (std::size_t i = 0; i + 1 < z.size(); ++i) d[i] = std::norm(z[i + 1] - z[i]);
  return std::sqrt(median(std::move(d)) / (2.0 * std::numbers::ln2));
}

template <typename T>
std::vector<T> moving_average(const std::vector<T>& y, int half_width) {
  const auto n = static_cast<int>(y.size());
  std::vector<T> out(y.size());
  for (int i = 0; i < n; ++i) {
    const int lo = std::max(0, i - half_width), hi = std::min(n - 1, i + half_width);
    T acc{};
    for (int k = lo; k <= hi; ++k) acc += y[k];
    out[i] = acc / static_cast<double>(hi - lo + 1);
  }
  return out;
}

inline std::vector<double> unwrap(const std::vector<double>& phase) {
  std::vector<double> out(phase);
  for (std::size_t i = 1; i < out.size(); ++i) {
    double d = out[i] - out[i - 1];
    d -= 2.0 * std::numbers::pi * std::round(d / (2.0 * std::numbers::pi));
    out[i] = out[i - 1] + d;
  }
  return out;
}

}  // namespace cqed::detail
