#include "volut/lut.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>

#include "volut/error.hpp"
#include "volut/half.hpp"

namespace volut {
namespace {

// Decimal b^n * factor, for error messages about tables too large to address.
std::string power_decimal(std::uint32_t bins, std::size_t rf_size, std::uint32_t factor) {
  std::vector<std::uint32_t> digits{1};  // little-endian base 10
  auto mul = [&digits](std::uint64_t m) {
    std::uint64_t carry = 0;
    for (std::uint32_t& d : digits) {
      const std::uint64_t v = d * m + carry;
      d = static_cast<std::uint32_t>(v % 10);
      carry = v / 10;
    }
    for (; carry > 0; carry /= 10) digits.push_back(static_cast<std::uint32_t>(carry % 10));
  };
  for (std::size_t i = 0; i < rf_size; ++i) mul(bins);
  mul(factor);
  std::string s;
  for (auto it = digits.rbegin(); it != digits.rend(); ++it) s.push_back(static_cast<char>('0' + *it));
  return s;
}

// b^n if it fits 64 bits.
std::optional<std::uint64_t> entries_checked(std::size_t rf_size, std::uint32_t bins) {
  std::uint64_t e = 1;
  for (std::size_t i = 0; i < rf_size; ++i) {
    if (e > std::numeric_limits<std::uint64_t>::max() / bins) return std::nullopt;
    e *= bins;
  }
  return e;
}

void check_shape(std::size_t rf_size, std::uint32_t bins) {
  require(rf_size >= 1, "lut: rf size must be >= 1");
  require(bins >= 2, "lut: bins must be >= 2");
}

template <typename T>
void put(std::string& out, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.append(buf, sizeof(T));
}

template <typename T>
T get(std::string_view bytes, std::size_t offset) {
  T v;
  std::memcpy(&v, bytes.data() + offset, sizeof(T));
  return v;
}

}  // namespace

std::uint32_t quantize(double normalized, std::uint32_t bins) {
  const double scaled = std::floor((normalized + 1.0) / 2.0 * static_cast<double>(bins - 1));
  if (!(scaled > 0.0)) return 0;
  if (scaled >= static_cast<double>(bins - 1)) return bins - 1;
  return static_cast<std::uint32_t>(scaled);
}

double bin_representative(std::uint32_t q, std::uint32_t bins) {
  const double v = 2.0 * (static_cast<double>(q) + 0.5) / static_cast<double>(bins - 1) - 1.0;
  return std::clamp(v, -1.0, 1.0);
}

EncodedNeighborhood encode_positions(std::span<const Vec3> slots, std::uint32_t bins) {
  require(!slots.empty(), "encode: empty receptive field");
  require(bins >= 2, "encode: bins must be >= 2");
  EncodedNeighborhood enc;
  const double n = static_cast<double>(slots.size());
  for (const Vec3& p : slots) {
    for (int a = 0; a < 3; ++a) enc.origin[a] += p[a];
  }
  for (int a = 0; a < 3; ++a) enc.origin[a] /= n;
  double r2 = 0.0;
  for (const Vec3& p : slots) {
    double d2 = 0.0;
    for (int a = 0; a < 3; ++a) {
      const double d = p[a] - enc.origin[a];
      d2 += d * d;
    }
    r2 = std::max(r2, d2);
  }
  enc.radius = std::sqrt(r2);
  enc.normalized.resize(slots.size());
  enc.quantized.resize(slots.size());
  for (std::size_t i = 0; i < slots.size(); ++i) {
    for (int a = 0; a < 3; ++a) {
      const double v = enc.radius > 0.0
                           ? std::clamp((slots[i][a] - enc.origin[a]) / enc.radius, -1.0, 1.0)
                           : 0.0;
      enc.normalized[i][a] = v;
      enc.quantized[i][a] = quantize(v, bins);
    }
  }
  return enc;
}

EncodedNeighborhood encode_neighborhood(const Vec3& interp_point, const NeighborList& neighbors,
                                        const PointCloud& cloud, std::size_t rf_size,
                                        std::uint32_t bins) {
  require(rf_size >= 1, "encode: rf size must be >= 1");
  if (neighbors.size() + 1 < rf_size)
    fail(ErrorCode::kInvalidArgument, "encode: receptive field of " + std::to_string(rf_size) +
                                          " needs " + std::to_string(rf_size - 1) +
                                          " neighbors, got " + std::to_string(neighbors.size()));
  std::vector<Vec3> slots;
  slots.reserve(rf_size);
  slots.push_back(interp_point);
  for (std::size_t i = 0; i + 1 < rf_size; ++i) slots.push_back(cloud.position(neighbors.indices[i]));
  return encode_positions(slots, bins);
}

std::uint64_t flat_index(std::span<const std::uint32_t> q, std::uint32_t bins) {
  std::uint64_t index = 0;
  for (std::uint32_t v : q) {
    if (v >= bins)
      fail(ErrorCode::kInvalidArgument,
           "flat_index: component " + std::to_string(v) + " outside [0, " + std::to_string(bins - 1) + "]");
    index = index * bins + v;
  }
  return index;
}

std::uint64_t lut_entries_per_axis(std::size_t rf_size, std::uint32_t bins) {
  check_shape(rf_size, bins);
  const auto e = entries_checked(rf_size, bins);
  if (!e) fail(ErrorCode::kCapacity, "lut: " + power_decimal(bins, rf_size, 1) + " entries per axis overflow 64 bits");
  return *e;
}

std::uint64_t lut_size_bytes(std::size_t rf_size, std::uint32_t bins) {
  check_shape(rf_size, bins);
  const auto e = entries_checked(rf_size, bins);
  if (!e || *e > std::numeric_limits<std::uint64_t>::max() / 6)
    fail(ErrorCode::kCapacity, "lut: table needs " + power_decimal(bins, rf_size, 6) + " bytes");
  return *e * 6;
}

RefinementFunction laplacian_refiner(double lambda) {
  require(lambda >= 0.0 && lambda <= 1.0, "laplacian refiner: lambda must lie in [0, 1]");
  char id[48];
  std::snprintf(id, sizeof(id), "laplacian:lambda=%.3f", lambda);
  return {id, [lambda](std::span<const double> coords) {
            if (coords.size() < 2) return 0.0;
            double mean = 0.0;
            for (std::size_t i = 1; i < coords.size(); ++i) mean += coords[i];
            mean /= static_cast<double>(coords.size() - 1);
            return std::clamp(lambda * (mean - coords[0]), -1.0, 1.0);
          }};
}

RefinementFunction zero_refiner() {
  return {"zero", [](std::span<const double>) { return 0.0; }};
}

LutTable::LutTable(std::size_t rf_size, std::uint32_t bins,
                   std::array<std::vector<std::uint16_t>, 3> axes, std::string provenance)
    : rf_size_(rf_size), bins_(bins), axes_(std::move(axes)), provenance_(std::move(provenance)) {
  const std::uint64_t entries = lut_entries_per_axis(rf_size, bins);
  for (const auto& axis : axes_) {
    require(axis.size() == entries, "lut: axis table holds " + std::to_string(axis.size()) +
                                        " entries, expected " + std::to_string(entries));
    for (std::uint16_t h : axis) {
      if ((h & 0x7C00) == 0x7C00) fail(ErrorCode::kFormat, "lut: non-finite stored offset");
    }
  }
}

float LutTable::offset(int axis, std::uint64_t flat) const { return from_half(axes_[axis][flat]); }

LutTable build_lut(const RefinementFunction& refiner, std::size_t rf_size, std::uint32_t bins) {
  const std::uint64_t entries = lut_entries_per_axis(rf_size, bins);
  std::vector<std::uint16_t> table(entries);
  std::vector<double> reps(rf_size);
  std::vector<std::uint32_t> digits(rf_size, 0);
  for (std::uint64_t flat = 0; flat < entries; ++flat) {
    for (std::size_t s = 0; s < rf_size; ++s) reps[s] = bin_representative(digits[s], bins);
    const double v = refiner.evaluate(reps);
    if (!std::isfinite(v) || std::fabs(v) > 1.0)
      fail(ErrorCode::kInvalidArgument, "build_lut: refiner '" + refiner.id + "' returned " +
                                            std::to_string(v) + " at entry " + std::to_string(flat));
    table[flat] = to_half(v);
    // Odometer increment, last slot fastest (matches flat_index order).
    for (std::size_t s = rf_size; s-- > 0;) {
      if (++digits[s] < bins) break;
      digits[s] = 0;
    }
  }
  std::array<std::vector<std::uint16_t>, 3> axes{table, table, std::move(table)};
  return LutTable(rf_size, bins, std::move(axes), refiner.id);
}

Vec3 lookup_refine_positions(const LutTable& table, std::span<const Vec3> slots) {
  require(slots.size() == table.rf_size(), "lookup: receptive field size mismatch");
  // Same arithmetic as encode_positions, without the allocations; the three
  // axis indices are accumulated in one pass.
  const std::size_t n = slots.size();
  const std::uint32_t bins = table.bins();
  double origin[3] = {0.0, 0.0, 0.0};
  for (const Vec3& p : slots) {
    for (int a = 0; a < 3; ++a) origin[a] += p[a];
  }
  for (int a = 0; a < 3; ++a) origin[a] /= static_cast<double>(n);
  double r2 = 0.0;
  for (const Vec3& p : slots) {
    double d2 = 0.0;
    for (int a = 0; a < 3; ++a) {
      const double d = p[a] - origin[a];
      d2 += d * d;
    }
    r2 = std::max(r2, d2);
  }
  const double radius = std::sqrt(r2);
  if (!(radius > 0.0)) return slots[0];
  std::uint64_t flat[3] = {0, 0, 0};
  for (const Vec3& p : slots) {
    for (int a = 0; a < 3; ++a) {
      const double v = std::clamp((p[a] - origin[a]) / radius, -1.0, 1.0);
      flat[a] = flat[a] * bins + quantize(v, bins);
    }
  }
  Vec3 out;
  for (int a = 0; a < 3; ++a) {
    const double off = table.offset(a, flat[a]);
    out[a] = static_cast<float>(static_cast<double>(slots[0][a]) + off * radius);
  }
  return out;
}

Vec3 lookup_refine(const LutTable& table, const Vec3& interp_point, const NeighborList& neighbors,
                   const PointCloud& cloud) {
  const std::size_t n = table.rf_size();
  if (neighbors.size() + 1 < n)
    fail(ErrorCode::kInvalidArgument, "lookup: receptive field of " + std::to_string(n) + " needs " +
                                          std::to_string(n - 1) + " neighbors, got " +
                                          std::to_string(neighbors.size()));
  Vec3 slots[16];
  std::vector<Vec3> heap_slots;
  Vec3* s = slots;
  if (n > 16) {
    heap_slots.resize(n);
    s = heap_slots.data();
  }
  s[0] = interp_point;
  for (std::size_t i = 1; i < n; ++i) s[i] = cloud.position(neighbors.indices[i - 1]);
  return lookup_refine_positions(table, std::span<const Vec3>(s, n));
}

PointCloud refine_frame(const LutTable& table, const InterpolationOutput& output) {
  require(output.neighbor_counts.size() == output.parents.size(),
          "refine_frame: interpolation output lacks per-point neighbor lists");
  const std::size_t n = table.rf_size();
  std::vector<Vec3> positions(output.cloud.positions().begin(), output.cloud.positions().end());
  std::vector<Vec3> slots(n);
  for (std::size_t j = 0; j < output.parents.size(); ++j) {
    const std::size_t slot = output.original_count + j;
    const auto row = output.neighbor_row(j);
    if (row.size() + 1 < n)
      fail(ErrorCode::kInvalidArgument, "refine_frame: receptive field of " + std::to_string(n) + " needs " +
                                            std::to_string(n - 1) + " neighbors, point has " +
                                            std::to_string(row.size()));
    slots[0] = positions[slot];
    for (std::size_t i = 1; i < n; ++i) slots[i] = output.cloud.position(row[i - 1]);
    positions[slot] = lookup_refine_positions(table, slots);
  }
  return PointCloud(std::move(positions),
                    std::vector<Rgb>(output.cloud.colors().begin(), output.cloud.colors().end()));
}

std::size_t lut_header_size(std::size_t provenance_length) {
  const std::size_t raw = 4 + 2 + 2 + 4 + 4 + 4 + provenance_length;
  return (raw + 7) / 8 * 8;
}

std::string serialize_lut(const LutTable& table) {
  std::string out;
  const std::uint64_t payload = lut_size_bytes(table.rf_size(), table.bins());
  out.reserve(lut_header_size(table.provenance().size()) + payload);
  out.append(kLutMagic, 4);
  put<std::uint16_t>(out, kLutVersion);
  put<std::uint16_t>(out, static_cast<std::uint16_t>(table.rf_size()));
  put<std::uint32_t>(out, table.bins());
  put<std::uint32_t>(out, 3);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(table.provenance().size()));
  out += table.provenance();
  out.resize(lut_header_size(table.provenance().size()), '\0');
  for (int a = 0; a < 3; ++a) {
    const auto axis = table.axis(a);
    out.append(reinterpret_cast<const char*>(axis.data()), axis.size() * sizeof(std::uint16_t));
  }
  return out;
}

LutTable deserialize_lut(std::string_view bytes) {
  if (bytes.size() < 20) fail(ErrorCode::kFormat, "lut file: truncated header (" + std::to_string(bytes.size()) + " bytes)");
  if (std::memcmp(bytes.data(), kLutMagic, 4) != 0) fail(ErrorCode::kFormat, "lut file: bad magic");
  const auto version = get<std::uint16_t>(bytes, 4);
  if (version != kLutVersion)
    fail(ErrorCode::kFormat, "lut file: unsupported version " + std::to_string(version));
  const auto rf_size = get<std::uint16_t>(bytes, 6);
  const auto bins = get<std::uint32_t>(bytes, 8);
  const auto axis_count = get<std::uint32_t>(bytes, 12);
  const auto tag_len = get<std::uint32_t>(bytes, 16);
  if (axis_count != 3) fail(ErrorCode::kFormat, "lut file: axis count " + std::to_string(axis_count) + ", expected 3");
  if (rf_size < 1 || bins < 2) fail(ErrorCode::kFormat, "lut file: invalid shape");
  const std::size_t header = lut_header_size(tag_len);
  std::uint64_t payload = 0;
  try {
    payload = lut_size_bytes(rf_size, bins);
  } catch (const Error&) {
    fail(ErrorCode::kFormat, "lut file: size mismatch, header declares an unaddressable table");
  }
  if (tag_len > bytes.size() || header > bytes.size() || bytes.size() - header != payload)
    fail(ErrorCode::kFormat, "lut file: size mismatch, header declares " + std::to_string(payload) +
                                 " payload bytes after a " + std::to_string(header) +
                                 "-byte header, file holds " + std::to_string(bytes.size()) + " bytes");
  std::string tag(bytes.substr(20, tag_len));
  const std::uint64_t entries = payload / 6;
  std::array<std::vector<std::uint16_t>, 3> axes;
  for (int a = 0; a < 3; ++a) {
    axes[a].resize(entries);
    std::memcpy(axes[a].data(), bytes.data() + header + a * entries * 2, entries * 2);
  }
  return LutTable(rf_size, bins, std::move(axes), std::move(tag));
}

void save_lut(const LutTable& table, const std::filesystem::path& path) {
  const std::string bytes = serialize_lut(table);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::kIo, "lut: cannot open " + path.string() + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(ErrorCode::kIo, "lut: write failed for " + path.string());
}

LutTable load_lut(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIo, "lut: cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  const std::string bytes = ss.str();
  return deserialize_lut(bytes);
}

}  // namespace volut
