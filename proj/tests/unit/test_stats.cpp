#include <cmath>
#include <vector>

#include "doctest.h"
#include "irtcat/stats.hpp"

using namespace irtcat::stats;

TEST_CASE("ranks and Spearman") {
  const std::vector<double> x{10, 20, 20, 30};
  CHECK(average_ranks(x) == std::vector<double>{1, 2.5, 2.5, 4});
  const std::vector<double> up{1, 2, 3, 4, 5}, down{5, 4, 3, 2, 1}, sq{1, 4, 9, 16, 25};
  CHECK(spearman(up, sq) == doctest::Approx(1.0));
  CHECK(spearman(up, down) == doctest::Approx(-1.0));
  // hand-computed with ties: Pearson of average ranks
  const std::vector<double> a{1, 2, 2, 3}, b{1, 3, 2, 4};
  CHECK(spearman(a, b) == doctest::Approx(0.9486832980505138));
  CHECK(pearson(up, up) == doctest::Approx(1.0));
  CHECK(mean(up) == 3.0);
}

TEST_CASE("type 7 quantiles") {
  const std::vector<double> x{3, 1, 4, 1, 5, 9, 2, 6};
  CHECK(quantile(x, 0.0) == 1);
  CHECK(quantile(x, 1.0) == 9);
  CHECK(quantile(x, 0.5) == doctest::Approx(3.5));
  CHECK(quantile(x, 0.25) == doctest::Approx(1.75));
  CHECK(quantile(x, 0.75) == doctest::Approx(5.25));
  const auto f = five_number(x);
  CHECK(f.min == 1);
  CHECK(f.max == 9);
  CHECK(f.median == doctest::Approx(3.5));
  CHECK(quantile(std::vector<double>{7}, 0.3) == 7);
}
