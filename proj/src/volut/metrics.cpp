#include "volut/metrics.hpp"

#include <cmath>
#include <limits>

#include "volut/error.hpp"
#include "volut/octree.hpp"

namespace volut {

double directed_mean_squared_nn(const PointCloud& from, const PointCloud& to) {
  require(!from.empty() && !to.empty(), "chamfer: empty cloud");
  const TwoLayerOctree tree(to);
  double sum = 0.0;
  for (std::size_t i = 0; i < from.size(); ++i) {
    const NeighborList nn = tree.query(from.position(i), 1, kNoExclusion);
    sum += squared_distance(from.position(i), to.position(nn.indices.front()));
  }
  return sum / static_cast<double>(from.size());
}

double chamfer_distance(const PointCloud& a, const PointCloud& b) {
  return directed_mean_squared_nn(a, b) + directed_mean_squared_nn(b, a);
}

namespace {

double psnr_from(double chamfer, const PointCloud& reference) {
  const double peak = reference.bbox().diagonal();
  if (!(peak > 0.0)) fail(ErrorCode::kInvalidArgument, "psnr: degenerate reference bounding box");
  const double mse = chamfer / 2.0;
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(peak * peak / mse);
}

}  // namespace

double geometry_psnr(const PointCloud& reference, const PointCloud& test) {
  require(!reference.empty() && !test.empty(), "psnr: empty cloud");
  if (!(reference.bbox().diagonal() > 0.0))
    fail(ErrorCode::kInvalidArgument, "psnr: degenerate reference bounding box");
  return psnr_from(chamfer_distance(reference, test), reference);
}

QualityReport evaluate_quality(const PointCloud& reference, const PointCloud& test) {
  require(!reference.empty() && !test.empty(), "quality: empty cloud");
  QualityReport r;
  r.point_count_in = reference.size();
  r.point_count_out = test.size();
  r.chamfer = chamfer_distance(test, reference);
  r.geometry_psnr = psnr_from(r.chamfer, reference);
  r.exact = std::isinf(r.geometry_psnr);
  return r;
}

}  // namespace volut
