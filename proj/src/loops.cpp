#include "birkhoff/loops.hpp"

#include <bit>
#include <functional>
#include <unordered_map>

namespace birkhoff {

LaurentSeries det_loop(const MatrixLoop& g, const Budget& budget) {
  int n = loop_dim(g);
  if (n > 16)
    throw std::invalid_argument("determinant by cofactor expansion limited to n <= 16");

  std::vector<std::vector<LaurentSeries>> e(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    e[static_cast<std::size_t>(i)].reserve(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j)
      e[static_cast<std::size_t>(i)].push_back(entry(g, i, j));
  }

  // minor over the columns in mask and the last popcount(mask) rows,
  // memoized on the mask
  std::unordered_map<unsigned, LaurentSeries> memo;
  std::function<LaurentSeries(unsigned)> minor_det = [&](unsigned mask) -> LaurentSeries {
    if (mask == 0u) return constant_series(Complex(1.0, 0.0));
    auto hit = memo.find(mask);
    if (hit != memo.end()) return hit->second;
    int r = n - std::popcount(mask);
    LaurentSeries acc = constant_series(Complex(0.0, 0.0));
    int sign = 1;
    for (int j = 0; j < n; ++j) {
      unsigned bit = 1u << j;
      if (!(mask & bit)) continue;
      LaurentSeries term =
          multiply(e[static_cast<std::size_t>(r)][static_cast<std::size_t>(j)],
                   minor_det(mask & ~bit), budget);
      acc = (sign > 0) ? (acc + term) : (acc - term);
      sign = -sign;
    }
    memo.emplace(mask, acc);
    return acc;
  };

  return minor_det((1u << n) - 1u);
}

}  // namespace birkhoff
