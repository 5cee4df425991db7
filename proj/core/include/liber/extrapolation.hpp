#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace liber {

/// Neville polynomial extrapolation of samples (h_k, v_k) to h = 0.
/// Used for the r -> 1 boundary limits and atom-mass extraction.
inline double neville_extrapolate(const std::vector<double>& hs,
                                  const std::vector<double>& vals) {
  const std::size_t n = hs.size();
  if (n == 0 || vals.size() != n)
    throw std::invalid_argument("neville_extrapolate: bad sample arrays");
  std::vector<double> tab = vals;
  for (std::size_t j = 1; j < n; ++j)
    for (std::size_t i = n - 1; i >= j; --i) {
      tab[i] = (hs[i - j] * tab[i] - hs[i] * tab[i - 1]) / (hs[i - j] - hs[i]);
      if (i == j) break;
    }
  return tab[n - 1];
}

}  // namespace liber
