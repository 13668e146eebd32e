// Thin wrappers around Eigen's FFT (kissfft backend). All transforms here are
// deterministic for identical inputs, which the dataset/pipeline contracts rely on.
#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include <unsupported/Eigen/FFT>

namespace beamloc::fft {

using cd = std::complex<double>;

inline std::vector<cd> forward(const std::vector<cd>& x) {
  Eigen::FFT<double> f;
  std::vector<cd> out;
  f.fwd(out, x);
  return out;
}

inline std::vector<cd> inverse(const std::vector<cd>& x) {
  Eigen::FFT<double> f;
  std::vector<cd> out;
  f.inv(out, x);
  return out;
}

// One-sided spectrum of a real block: bins 0 .. n/2 inclusive.
inline std::vector<cd> real_forward_half(const std::vector<double>& x) {
  Eigen::FFT<double> f;
  f.SetFlag(Eigen::FFT<double>::HalfSpectrum);
  std::vector<cd> out;
  f.fwd(out, x);
  return out;
}

inline std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

}  // namespace beamloc::fft
