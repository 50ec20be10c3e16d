#include <catch2/catch_amalgamated.hpp>

#include <map>
#include <set>
#include <utility>
#include <vector>

#include "xrsim/williams.hpp"

using namespace xrsim;

namespace {

// Exhaustive verification oracle: row/column Latin property plus
// every ordered pair of distinct conditions adjacent exactly once.
void verify_williams(const std::vector<std::vector<int>>& sq, int n) {
  REQUIRE(sq.size() == static_cast<std::size_t>(n));
  for (int r = 0; r < n; ++r) {
    std::set<int> row(sq[r].begin(), sq[r].end());
    CHECK(row.size() == static_cast<std::size_t>(n));
  }
  for (int c = 0; c < n; ++c) {
    std::set<int> col;
    for (int r = 0; r < n; ++r) col.insert(sq[r][c]);
    CHECK(col.size() == static_cast<std::size_t>(n));
  }
  std::map<std::pair<int, int>, int> adjacency;
  for (int r = 0; r < n; ++r)
    for (int c = 0; c + 1 < n; ++c) ++adjacency[{sq[r][c], sq[r][c + 1]}];
  CHECK(adjacency.size() == static_cast<std::size_t>(n * (n - 1)));
  for (const auto& [pair, count] : adjacency) {
    CHECK(pair.first != pair.second);
    CHECK(count == 1);
  }
}

}  // namespace

TEST_CASE("smallest square", "[williams]") {
  const auto sq = generate_williams_square(2);
  REQUIRE(sq == std::vector<std::vector<int>>{{0, 1}, {1, 0}});
}

TEST_CASE("n=4 square matches the interleaved construction", "[williams]") {
  const auto sq = generate_williams_square(4);
  REQUIRE(sq == std::vector<std::vector<int>>{
                    {0, 1, 3, 2}, {1, 2, 0, 3}, {2, 3, 1, 0}, {3, 0, 2, 1}});
  verify_williams(sq, 4);
}

TEST_CASE("balance properties hold for all even sizes in use", "[williams]") {
  for (int n : {2, 4, 6, 8}) verify_williams(generate_williams_square(n), n);
}

TEST_CASE("odd or non-positive sizes are rejected", "[williams]") {
  CHECK_THROWS_AS(generate_williams_square(3), std::invalid_argument);
  CHECK_THROWS_AS(generate_williams_square(7), std::invalid_argument);
  CHECK_THROWS_AS(generate_williams_square(0), std::invalid_argument);
  CHECK_THROWS_AS(generate_williams_square(-2), std::invalid_argument);
}
