#pragma once

#include <span>
#include <vector>

namespace irtcat::stats {

double mean(std::span<const double> xs);

double pearson(std::span<const double> xs, std::span<const double> ys);

/// 1-based ranks; tied values share the average of their ranks.
std::vector<double> average_ranks(std::span<const double> xs);

double spearman(std::span<const double> xs, std::span<const double> ys);

/// Linear-interpolation quantile (R type 7) of unsorted data, q in [0, 1].
double quantile(std::vector<double> xs, double q);

struct FiveNumber {
  double min = 0.0, q1 = 0.0, median = 0.0, q3 = 0.0, max = 0.0;
};

FiveNumber five_number(std::span<const double> xs);

}  // namespace irtcat::stats
