#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <set>

#include "support/gen.hpp"
#include "support/oracles.hpp"
#include "volut/error.hpp"
#include "volut/half.hpp"
#include "volut/interpolate.hpp"
#include "volut/lut.hpp"
#include "volut/sr_pipeline.hpp"

using namespace volut;

namespace {

const LutTable& laplacian_4_16() {
  static const LutTable t = build_lut(laplacian_refiner(0.5), 4, 16);
  return t;
}

std::vector<Vec3> random_slots(gen::Source& s, std::size_t n, double spread) {
  std::vector<Vec3> slots;
  const Vec3 base = gen::point_in_box(s, 10.0);
  for (std::size_t i = 0; i < n; ++i)
    slots.push_back({static_cast<float>(base.x + s.range(-spread, spread)), static_cast<float>(base.y + s.range(-spread, spread)),
                     static_cast<float>(base.z + s.range(-spread, spread))});
  return slots;
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

}  // namespace

TEST_SUITE("lut") {

TEST_CASE("lut_size_bytes reproduces the table-size rows exactly") {
  CHECK(lut_size_bytes(3, 128) == 12'582'912ull);
  CHECK(lut_size_bytes(3, 64) == 1'572'864ull);
  CHECK(lut_size_bytes(4, 128) == 1'610'612'736ull);
  CHECK(lut_size_bytes(4, 64) == 100'663'296ull);
  CHECK(lut_size_bytes(5, 128) == 206'158'430'208ull);
  CHECK(lut_size_bytes(5, 64) == 6'442'450'944ull);
  CHECK(lut_size_bytes(4, 16) == 393'216ull);
}

TEST_CASE("lut_size_bytes overflow reports the exact requirement") {
  try {
    lut_size_bytes(20, 128);
    FAIL("no overflow error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kCapacity);
    CHECK(std::string(e.what()).find("8362779449448983678075894352243135564742656") != std::string::npos);
  }
  CHECK_THROWS_AS(lut_size_bytes(0, 16), Error);
  CHECK_THROWS_AS(lut_size_bytes(3, 1), Error);
}

TEST_CASE("quantize: endpoints, monotone, roundtrip within 1/(b-1)") {
  for (std::uint32_t b : {8u, 128u}) {
    CHECK(quantize(-1.0, b) == 0);
    CHECK(quantize(1.0, b) == b - 1);
    gen::Source s(b);
    double worst = 0.0;
    std::uint32_t prev = 0;
    std::vector<double> xs(100000);
    for (double& x : xs) x = s.range(-1.0, 1.0);
    for (double x : xs) worst = std::max(worst, std::fabs(bin_representative(quantize(x, b), b) - x));
    CHECK(worst <= 1.0 / (b - 1.0));
    std::sort(xs.begin(), xs.end());
    bool monotone = true;
    for (double x : xs) {
      const std::uint32_t q = quantize(x, b);
      monotone = monotone && q >= prev;
      prev = q;
    }
    CHECK(monotone);
  }
  CHECK(quantize(-7.0, 16) == 0);
  CHECK(quantize(7.0, 16) == 15);
}

TEST_CASE("encode: degenerate and endpoint neighborhoods") {
  const std::vector<Vec3> same(4, Vec3{1, 2, 3});
  const EncodedNeighborhood e = encode_positions(same, 16);
  CHECK(e.radius == 0.0);
  for (const auto& q : e.quantized)
    for (std::uint32_t v : q) CHECK(v == 7);

  const PointCloud c({{1, 0, 0}});
  NeighborList nl;
  nl.indices = {0};
  nl.distances = {1.0};
  const EncodedNeighborhood two = encode_neighborhood({0, 0, 0}, nl, c, 2, 128);
  CHECK(two.normalized[0][0] == -1.0);
  CHECK(two.normalized[1][0] == 1.0);
  CHECK(two.quantized[0][0] == 0);
  CHECK(two.quantized[1][0] == 127);
  CHECK_THROWS_AS(encode_neighborhood({0, 0, 0}, nl, c, 3, 128), Error);
}

TEST_CASE("encode: origin is the centroid and every coordinate lies in [-1, 1]") {
  gen::for_all(500, 100, [](std::uint64_t seed) {
    gen::Source s(seed);
    const std::size_t n = 2 + s.below(6);
    const auto slots = random_slots(s, n, s.range(1e-3, 5.0));
    const EncodedNeighborhood e = encode_positions(slots, 32);
    for (int a = 0; a < 3; ++a) {
      double mean = 0.0;
      for (const Vec3& p : slots) mean += p[a];
      CHECK(e.origin[a] == doctest::Approx(mean / static_cast<double>(n)));
    }
    double widest = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double r2 = 0.0;
      for (int a = 0; a < 3; ++a) {
        CHECK(std::fabs(e.normalized[i][a]) <= 1.0);
        CHECK(e.quantized[i][a] == quantize(e.normalized[i][a], 32));
        r2 += e.normalized[i][a] * e.normalized[i][a];
      }
      widest = std::max(widest, r2);
    }
    CHECK(widest == doctest::Approx(1.0));
  });
}

TEST_CASE("flat_index: hand values, range check, bijection") {
  const std::uint32_t zeros[4] = {0, 0, 0, 0};
  CHECK(flat_index(zeros, 128) == 0);
  const std::uint32_t top[4] = {127, 127, 127, 127};
  CHECK(flat_index(top, 128) == 268'435'455ull);
  const std::uint32_t slot0[3] = {1, 0, 0};
  CHECK(flat_index(slot0, 4) == 16);
  const std::uint32_t bad[2] = {0, 4};
  CHECK_THROWS_AS(flat_index(bad, 4), Error);
  std::set<std::uint64_t> seen;
  for (std::uint32_t a = 0; a < 4; ++a)
    for (std::uint32_t b = 0; b < 4; ++b)
      for (std::uint32_t c = 0; c < 4; ++c) {
        const std::uint32_t q[3] = {a, b, c};
        const std::uint64_t f = flat_index(q, 4);
        CHECK(f < 64);
        seen.insert(f);
      }
  CHECK(seen.size() == 64);
}

TEST_CASE("binary16 encoding matches the rounding oracle") {
  CHECK(to_half(1.0) == 0x3C00);
  CHECK(to_half(-2.0) == 0xC000);
  CHECK(to_half(65504.0) == 0x7BFF);
  CHECK(to_half(65520.0) == 0x7C00);
  CHECK(to_half(0x1.0p-24) == 0x0001);
  CHECK(to_half(0x1.0p-25) == 0x0000);
  CHECK(to_half(3 * 0x1.0p-25) == 0x0002);
  CHECK(to_half(1.0 + 0x1.0p-11) == 0x3C00);
  CHECK(to_half(1.0 + 3 * 0x1.0p-11) == 0x3C02);
  gen::for_all(200000, 101, [](std::uint64_t seed) {
    gen::Source s(seed);
    const double x = std::ldexp(s.range(-1.0, 1.0), static_cast<int>(s.below(46)) - 30);
    const double want = oracle::round_to_half(x);
    const double got = from_half(to_half(x));
    if (got != want) CHECK_MESSAGE(got == want, "x = " << x);
  });
}

TEST_CASE("laplacian refiner closed forms") {
  const RefinementFunction f = laplacian_refiner(0.5);
  const double centered[3] = {0.2, 0.1, 0.3};
  CHECK(f.evaluate(centered) == doctest::Approx(0.0));
  const double two[2] = {-0.4, 0.6};
  CHECK(f.evaluate(two) == doctest::Approx(0.5));
  CHECK_THROWS_AS(laplacian_refiner(1.5), Error);
}

TEST_CASE("build_lut: zero refiner gives an all-zero table and identity lookups") {
  const LutTable z = build_lut(zero_refiner(), 3, 8);
  for (int a = 0; a < 3; ++a)
    for (std::uint16_t h : z.axis(a)) CHECK(h == 0);
  gen::Source s(102);
  for (int t = 0; t < 100; ++t) {
    const auto slots = random_slots(s, 3, 1.0);
    CHECK(lookup_refine_positions(z, slots) == slots[0]);
  }
}

TEST_CASE("build_lut: n=3, b=8 entry at q=(4,0,7)") {
  const LutTable t = build_lut(laplacian_refiner(0.5), 3, 8);
  const std::uint32_t q[3] = {4, 0, 7};
  const std::uint64_t f = flat_index(q, 8);
  const double want = oracle::round_to_half(oracle::laplacian_at_bins(q, 8, 0.5));
  CHECK(want == -0.10711669921875);
  for (int a = 0; a < 3; ++a) CHECK(static_cast<double>(t.offset(a, f)) == want);
}

TEST_CASE("build_lut: every entry equals the oracle at its representatives") {
  for (auto [n, b] : {std::pair<std::size_t, std::uint32_t>{3, 8}, {4, 16}, {2, 128}}) {
    const LutTable t = build_lut(laplacian_refiner(0.7), n, b);
    const std::uint64_t entries = lut_entries_per_axis(n, b);
    std::vector<std::uint32_t> q(n, 0);
    std::size_t wrong = 0;
    for (std::uint64_t f = 0; f < entries; ++f) {
      std::uint64_t rest = f;
      for (std::size_t s = n; s-- > 0;) {
        q[s] = static_cast<std::uint32_t>(rest % b);
        rest /= b;
      }
      const double want = oracle::round_to_half(std::clamp(oracle::laplacian_at_bins(q, b, 0.7), -1.0, 1.0));
      for (int a = 0; a < 3; ++a) wrong += static_cast<double>(t.offset(a, f)) != want;
    }
    INFO("n " << n << " b " << b);
    CHECK(wrong == 0);
  }
  CHECK(laplacian_4_16().axis(0).size() * 3 * 2 == 393'216u);
}

TEST_CASE("build_lut rejects refiners that leave [-1, 1]") {
  RefinementFunction wild{"wild", [](std::span<const double> c) { return 3.0 * c[0]; }};
  CHECK_THROWS_AS(build_lut(wild, 2, 4), Error);
  RefinementFunction nan{"nan", [](std::span<const double>) { return NAN; }};
  CHECK_THROWS_AS(build_lut(nan, 2, 4), Error);
}

TEST_CASE("lookup_refine equals the refiner oracle on 10^4 neighborhoods") {
  const LutTable& t = laplacian_4_16();
  std::size_t wrong = 0;
  gen::for_all(10000, 103, [&](std::uint64_t seed) {
    gen::Source s(seed);
    const auto slots = random_slots(s, 4, s.range(1e-3, 3.0));
    const Vec3 got = lookup_refine_positions(t, slots);
    const Vec3 want = oracle::refine_laplacian(slots, 16, 0.5);
    for (int a = 0; a < 3; ++a) {
      const double tol = 4 * std::numeric_limits<float>::epsilon() * std::max(1.0, std::fabs(double(want[a])));
      if (std::fabs(got[a] - want[a]) > tol) {
        ++wrong;
        MESSAGE("seed " << seed << " axis " << a << " got " << got[a] << " want " << want[a]);
      }
    }
  });
  CHECK(wrong == 0);
}

TEST_CASE("lookup_refine through a cloud and neighbor list, per-axis displacement bounded by R") {
  const LutTable t = build_lut(laplacian_refiner(1.0), 4, 16);
  gen::for_all(2000, 104, [&](std::uint64_t seed) {
    gen::Source s(seed);
    const auto slots = random_slots(s, 4, 1.0);
    const PointCloud c(std::vector<Vec3>(slots.begin() + 1, slots.end()));
    NeighborList nl;
    nl.indices = {0, 1, 2};
    nl.distances = {0, 0, 0};
    const Vec3 got = lookup_refine(t, slots[0], nl, c);
    CHECK(got == lookup_refine_positions(t, slots));
    const EncodedNeighborhood e = encode_positions(slots, 16);
    for (int a = 0; a < 3; ++a) CHECK(std::fabs(static_cast<double>(got[a]) - slots[0][a]) <= e.radius * (1 + 1e-6));
  });
}

TEST_CASE("scale equivariance and translation invariance") {
  const LutTable& t = laplacian_4_16();
  gen::for_all(2000, 105, [&](std::uint64_t seed) {
    gen::Source s(seed);
    // Dyadic coordinates keep the scaled and translated copies exact.
    std::vector<Vec3> slots(4);
    for (Vec3& p : slots)
      p = {static_cast<float>(s.below(4096)) / 1024.0f, static_cast<float>(s.below(4096)) / 1024.0f,
           static_cast<float>(s.below(4096)) / 1024.0f};
    const Vec3 base = lookup_refine_positions(t, slots);
    const double r = encode_positions(slots, 16).radius;
    for (float scale : {0.125f, 0.5f, 4.0f, 1024.0f}) {
      std::vector<Vec3> scaled;
      for (const Vec3& p : slots) scaled.push_back({p.x * scale, p.y * scale, p.z * scale});
      const Vec3 got = lookup_refine_positions(t, scaled);
      for (int a = 0; a < 3; ++a) {
        const double want_off = scale * (static_cast<double>(base[a]) - slots[0][a]);
        const double got_off = static_cast<double>(got[a]) - scaled[0][a];
        CHECK(std::fabs(got_off - want_off) <= 1e-6 * scale * std::max(r, 1e-30));
      }
    }
    const Vec3 shift{static_cast<float>(s.below(64)) - 32.0f, 0.25f * static_cast<float>(s.below(64)), -7.5f};
    std::vector<Vec3> moved;
    for (const Vec3& p : slots) moved.push_back({p.x + shift.x, p.y + shift.y, p.z + shift.z});
    const Vec3 got = lookup_refine_positions(t, moved);
    for (int a = 0; a < 3; ++a) {
      const double want = static_cast<double>(base[a]) + shift[a];
      CHECK(std::fabs(got[a] - want) <= 1e-6 * std::max(1.0, std::fabs(want)));
    }
  });
}

TEST_CASE("refine_frame: zero table is identity, originals and colors untouched") {
  const PointCloud c = gen::uniform_cloud(3000, 106, true);
  InterpolationOutput out = dilated_midpoint_interpolate(c, plan_upsample(c.size(), 2.0, 4, 2, 1), 4, 2);
  colorize(out, c);
  CHECK(refine_frame(build_lut(zero_refiner(), 4, 16), out) == out.cloud);
  const PointCloud refined = refine_frame(laplacian_4_16(), out);
  REQUIRE(refined.size() == out.cloud.size());
  std::size_t moved = 0;
  for (std::size_t i = 0; i < refined.size(); ++i) {
    if (i < c.size()) CHECK(refined.position(i) == c.position(i));
    else moved += !(refined.position(i) == out.cloud.position(i));
    CHECK(refined.color(i) == out.cloud.color(i));
  }
  CHECK(moved > 0);
  for (std::size_t j = 0; j < out.parents.size(); j += 97) {
    std::vector<Vec3> slots{out.cloud.position(c.size() + j)};
    for (PointIndex i : out.neighbor_row(j).first(3)) slots.push_back(c.position(i));
    CHECK(refined.position(c.size() + j) == lookup_refine_positions(laplacian_4_16(), slots));
  }
}

TEST_CASE("lut file: roundtrip, size, corruption") {
  const LutTable& t = laplacian_4_16();
  const auto dir = std::filesystem::temp_directory_path() / "volut_lut_test";
  std::filesystem::create_directories(dir);
  save_lut(t, dir / "t.vlut");
  CHECK(std::filesystem::file_size(dir / "t.vlut") == 48 + 393'216u);
  CHECK(load_lut(dir / "t.vlut") == t);

  const std::string bytes = read_file(dir / "t.vlut");
  CHECK(bytes.substr(0, 4) == "VLUT");
  std::string corrupt = bytes;
  corrupt[16] = static_cast<char>(corrupt[16] + 9);  // provenance length
  try {
    deserialize_lut(corrupt);
    FAIL("corrupted length accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kFormat);
    CHECK(std::string(e.what()).find("size mismatch") != std::string::npos);
  }
  corrupt = bytes;
  corrupt[8] = 17;  // bins
  CHECK_THROWS_AS(deserialize_lut(corrupt), Error);
  corrupt = bytes;
  corrupt[0] = 'X';
  CHECK_THROWS_AS(deserialize_lut(corrupt), Error);
  corrupt = bytes;
  corrupt[4] = 2;
  CHECK_THROWS_AS(deserialize_lut(corrupt), Error);
  CHECK_THROWS_AS(deserialize_lut(std::string_view(bytes).substr(0, bytes.size() - 1)), Error);
  CHECK_THROWS_AS(deserialize_lut(std::string_view(bytes).substr(0, 10)), Error);
  // A stored infinity is rejected.
  corrupt = bytes;
  corrupt[48] = 0x00;
  corrupt[49] = 0x7C;
  CHECK_THROWS_AS(deserialize_lut(corrupt), Error);
  std::filesystem::remove_all(dir);
}

}  // TEST_SUITE
