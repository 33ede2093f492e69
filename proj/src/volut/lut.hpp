#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "volut/interpolate.hpp"
#include "volut/octree.hpp"
#include "volut/point_cloud.hpp"

namespace volut {

// Receptive field of one interpolated point, normalized and quantized.
//
// The normalization origin is the centroid of the n receptive-field points
// (slot 0 is the interpolated point, slots 1..n-1 its nearest neighbors) and
// `radius` is the largest distance from any of them to the origin, so every
// normalized coordinate lies in [-1, 1]. A zero radius maps every
// coordinate to the middle bin.
struct EncodedNeighborhood {
  std::array<double, 3> origin{};
  double radius = 0.0;
  std::vector<std::array<double, 3>> normalized;       // [slot][axis]
  std::vector<std::array<std::uint32_t, 3>> quantized;  // [slot][axis]
};

// floor(((v + 1) / 2) * (b - 1)), clamped to [0, b - 1].
std::uint32_t quantize(double normalized, std::uint32_t bins);
// Midpoint of the preimage of bin q, clamped to [-1, 1].
double bin_representative(std::uint32_t q, std::uint32_t bins);

EncodedNeighborhood encode_positions(std::span<const Vec3> slots, std::uint32_t bins);
EncodedNeighborhood encode_neighborhood(const Vec3& interp_point, const NeighborList& neighbors,
                                        const PointCloud& cloud, std::size_t rf_size,
                                        std::uint32_t bins);

// Mixed radix, slot 0 most significant.
std::uint64_t flat_index(std::span<const std::uint32_t> q, std::uint32_t bins);

// b^n * 3 axes * 2 bytes. Throws kCapacity (with the exact byte count in the
// message) when the result does not fit 64 bits.
std::uint64_t lut_size_bytes(std::size_t rf_size, std::uint32_t bins);
std::uint64_t lut_entries_per_axis(std::size_t rf_size, std::uint32_t bins);

// Maps one axis's n normalized coordinates (interpolated point first) to a
// normalized offset in [-1, 1]. The same function serves all three axes.
struct RefinementFunction {
  std::string id;
  std::function<double(std::span<const double>)> evaluate;
};

// lambda * (mean of slots 1..n-1 - slot 0), clamped to [-1, 1].
RefinementFunction laplacian_refiner(double lambda);
RefinementFunction zero_refiner();

class LutTable {
 public:
  LutTable(std::size_t rf_size, std::uint32_t bins, std::array<std::vector<std::uint16_t>, 3> axes,
           std::string provenance);

  std::size_t rf_size() const { return rf_size_; }
  std::uint32_t bins() const { return bins_; }
  const std::string& provenance() const { return provenance_; }
  std::span<const std::uint16_t> axis(int a) const { return axes_[a]; }
  float offset(int axis, std::uint64_t flat) const;

  friend bool operator==(const LutTable&, const LutTable&) = default;

 private:
  std::size_t rf_size_;
  std::uint32_t bins_;
  std::array<std::vector<std::uint16_t>, 3> axes_;
  std::string provenance_;
};

LutTable build_lut(const RefinementFunction& refiner, std::size_t rf_size, std::uint32_t bins);

Vec3 lookup_refine(const LutTable& table, const Vec3& interp_point, const NeighborList& neighbors,
                   const PointCloud& cloud);
Vec3 lookup_refine_positions(const LutTable& table, std::span<const Vec3> slots);

// Applies lookup_refine to every new point; originals and colors untouched.
// Neighbor lists index the original points, which lead output.cloud.
PointCloud refine_frame(const LutTable& table, const InterpolationOutput& output);

inline constexpr char kLutMagic[4] = {'V', 'L', 'U', 'T'};
inline constexpr std::uint16_t kLutVersion = 1;

std::size_t lut_header_size(std::size_t provenance_length);
std::string serialize_lut(const LutTable& table);
LutTable deserialize_lut(std::string_view bytes);
void save_lut(const LutTable& table, const std::filesystem::path& path);
LutTable load_lut(const std::filesystem::path& path);

}  // namespace volut
