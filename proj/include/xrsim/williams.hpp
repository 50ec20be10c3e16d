#pragma once

#include <stdexcept>
#include <vector>

#include "xrsim/common.hpp"

namespace xrsim {

// Williams Latin square for even n: row/column Latin, and every ordered pair
// of distinct conditions appears as immediate neighbors exactly once across
// the square. Base row interleaves 0, 1, n-1, 2, n-2, ...; row r adds r mod n.
inline std::vector<std::vector<int>> generate_williams_square(int n) {
  if (n <= 0 || n % 2 != 0)
    throw std::invalid_argument("williams square: n must be a positive even integer");

  std::vector<int> base(n);
  for (int j = 0; j < n; ++j) {
    base[j] = (j % 2 == 0) ? (n - j / 2) % n : (j + 1) / 2;
  }

  std::vector<std::vector<int>> square(n, std::vector<int>(n));
  for (int r = 0; r < n; ++r)
    for (int j = 0; j < n; ++j) square[r][j] = (base[j] + r) % n;
  return square;
}

}  // namespace xrsim
