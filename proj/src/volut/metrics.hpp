#pragma once

#include <cstddef>

#include "volut/point_cloud.hpp"

namespace volut {

// Geometry quality of `test` against `reference`.
//
// chamfer is the symmetric squared Chamfer distance: the mean squared
// nearest-neighbor distance from test into reference plus the reverse term.
// geometry_psnr is 10 log10(peak^2 / mse) with peak the reference bounding
// box diagonal and mse = chamfer / 2 (the mean of the two directed terms).
// Identical supports give mse = 0; psnr is then +infinity and `exact` is set.
struct QualityReport {
  double chamfer = 0.0;
  double geometry_psnr = 0.0;
  bool exact = false;
  std::size_t point_count_in = 0;   // reference
  std::size_t point_count_out = 0;  // test
};

double chamfer_distance(const PointCloud& a, const PointCloud& b);
double geometry_psnr(const PointCloud& reference, const PointCloud& test);
QualityReport evaluate_quality(const PointCloud& reference, const PointCloud& test);

// Mean squared distance from each point of `from` to its nearest point in
// `to`, summed in index order.
double directed_mean_squared_nn(const PointCloud& from, const PointCloud& to);

}  // namespace volut
