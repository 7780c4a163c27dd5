#include <cmath>
#include <cstring>
#include <filesystem>
#include <random>

#include <gtest/gtest.h>

#include "mftiq/file_io.hpp"
#include "mftiq/flo_io.hpp"
#include "mftiq/flow.hpp"
#include "mftiq/image_ops.hpp"
#include "mftiq/png_io.hpp"

namespace fs = std::filesystem;
using namespace mftiq;

namespace {

FlowField random_field(std::mt19937& rng, int w, int h, float lo, float hi) {
  std::uniform_real_distribution<float> u(lo, hi);
  FlowField f(w, h);
  for (auto& v : f.pixels()) v = {u(rng), u(rng)};
  return f;
}

fs::path temp_dir(const char* name) {
  const fs::path p = fs::temp_directory_path() / (std::string("mftiq_unit_") + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST(Bilinear, MidpointOfRamp) {
  ScalarMap m(2, 2);
  m(0, 0) = 0;
  m(1, 0) = 2;
  m(0, 1) = 0;
  m(1, 1) = 2;
  const auto s = bilinear_sample(m, {0.5, 0.0});
  EXPECT_FLOAT_EQ(s.value, 1.0f);
  EXPECT_FALSE(s.out_of_bounds);
}

TEST(Bilinear, ExactAtGridPoints) {
  std::mt19937 rng(1);
  std::uniform_real_distribution<float> u(-5, 5);
  ScalarMap m(5, 4);
  for (auto& v : m.pixels()) v = u(rng);
  for (int y = 0; y < 4; ++y) {
    for (int x = 0; x < 5; ++x) {
      const auto s = bilinear_sample(m, {double(x), double(y)});
      EXPECT_EQ(s.value, m(x, y));
      EXPECT_FALSE(s.out_of_bounds);
    }
  }
}

TEST(Bilinear, ClampsAndFlagsOutside) {
  ScalarMap m(4, 4);
  for (int y = 0; y < 4; ++y)
    for (int x = 0; x < 4; ++x) m(x, y) = float(10 * y + x);
  const auto s = bilinear_sample(m, {-2.0, 1.0});
  EXPECT_EQ(s.value, m(0, 1));
  EXPECT_TRUE(s.out_of_bounds);
  EXPECT_TRUE(bilinear_sample(m, {3.0001, 0.0}).out_of_bounds);
  EXPECT_FALSE(bilinear_sample(m, {3.0, 3.0}).out_of_bounds);
}

TEST(Bilinear, EmptyMapThrows) { EXPECT_THROW(bilinear_sample(ScalarMap{}, {0, 0}), DimensionError); }

TEST(Bilinear, LinearInValues) {
  std::mt19937 rng(2);
  std::uniform_real_distribution<float> u(-1, 1);
  ScalarMap a(6, 6), b(6, 6), sum(6, 6);
  for (std::size_t i = 0; i < a.size(); ++i) {
    a[i] = u(rng);
    b[i] = u(rng);
    sum[i] = 2.0f * a[i] + b[i];
  }
  std::uniform_real_distribution<double> pos(0, 5);
  for (int k = 0; k < 100; ++k) {
    const Point2 p{pos(rng), pos(rng)};
    EXPECT_NEAR(bilinear_sample(sum, p).value, 2.0f * bilinear_sample(a, p).value + bilinear_sample(b, p).value, 1e-5);
  }
}

TEST(Chain, ZeroWithZero) {
  const auto c = chain_flows(FlowField(5, 5), FlowField(5, 5));
  for (const auto& v : c.flow.pixels()) EXPECT_EQ(v, (Vec2f{0, 0}));
  for (auto v : c.valid.pixels()) EXPECT_EQ(v, 1);
}

TEST(Chain, ConstantFieldsAdd) {
  const auto c = chain_flows(FlowField(8, 8, {1, 0}), FlowField(8, 8, {2, 0}));
  for (int y = 0; y < 8; ++y) {
    for (int x = 0; x < 7; ++x) {
      EXPECT_EQ(c.flow(x, y), (Vec2f{3, 0}));
      EXPECT_EQ(c.valid(x, y), 1);
    }
    EXPECT_EQ(c.valid(7, y), 0);  // intermediate x = 8 leaves the image
  }
}

TEST(Chain, RandomIntegerFieldsMatchScalarOracle) {
  std::mt19937 rng(3);
  std::uniform_int_distribution<int> d(-3, 3);
  for (int trial = 0; trial < 20; ++trial) {
    FlowField ab(8, 8), bc(8, 8);
    for (int y = 0; y < 8; ++y) {
      for (int x = 0; x < 8; ++x) {
        int dx, dy;
        do {
          dx = d(rng);
          dy = d(rng);
        } while (x + dx < 0 || x + dx > 7 || y + dy < 0 || y + dy > 7);
        ab(x, y) = {float(dx), float(dy)};
        bc(x, y) = {float(d(rng)), float(d(rng))};
      }
    }
    const auto c = chain_flows(ab, bc);
    for (int y = 0; y < 8; ++y) {
      for (int x = 0; x < 8; ++x) {
        const int mx = x + int(ab(x, y).x), my = y + int(ab(x, y).y);
        const Vec2f expect{ab(x, y).x + bc(mx, my).x, ab(x, y).y + bc(mx, my).y};
        EXPECT_EQ(c.flow(x, y), expect);
        EXPECT_EQ(c.valid(x, y), 1);
        // endpoint consistency
        EXPECT_EQ(x + c.flow(x, y).x, mx + bc(mx, my).x);
      }
    }
  }
}

TEST(Chain, ZeroSecondIsIdentityOnIntegerFirst) {
  FlowField ab(6, 6);
  for (int y = 0; y < 6; ++y)
    for (int x = 0; x < 6; ++x) ab(x, y) = {x < 3 ? 1.0f : -1.0f, 0.0f};
  const auto c = chain_flows(ab, FlowField(6, 6));
  EXPECT_EQ(c.flow, ab);
}

TEST(Chain, ResolutionMismatchThrows) {
  EXPECT_THROW(chain_flows(FlowField(4, 4), FlowField(4, 5)), DimensionError);
}

TEST(ScaleFlow, ConstantQuarter) {
  const FlowField s = scale_flow(FlowField(8, 8, {4, 8}), 0.25, 0.25);
  ASSERT_EQ(s.resolution(), (Resolution{2, 2}));
  for (const auto& v : s.pixels()) EXPECT_EQ(v, (Vec2f{1, 2}));
}

TEST(ScaleFlow, IdentityAtUnitScale) {
  std::mt19937 rng(4);
  const FlowField f = random_field(rng, 7, 5, -3, 3);
  EXPECT_EQ(scale_flow(f, 1, 1), f);
}

TEST(ScaleFlow, RampMatchesResampleThenScale) {
  FlowField f(4, 4);
  auto ramp = [](double x, double y) { return Vec2f{float(x + 2 * y), float(3 * x - y)}; };
  for (int y = 0; y < 4; ++y)
    for (int x = 0; x < 4; ++x) f(x, y) = ramp(x, y);
  const FlowField s = scale_flow(f, 0.5, 0.5);
  ASSERT_EQ(s.resolution(), (Resolution{2, 2}));
  for (int y = 0; y < 2; ++y) {
    for (int x = 0; x < 2; ++x) {
      // pixel-centre alignment: output centre x maps to (x + 0.5) / 0.5 - 0.5
      const Vec2f src = ramp((x + 0.5) / 0.5 - 0.5, (y + 0.5) / 0.5 - 0.5);
      EXPECT_NEAR(s(x, y).x, 0.5 * src.x, 1e-5);
      EXPECT_NEAR(s(x, y).y, 0.5 * src.y, 1e-5);
    }
  }
}

TEST(ScaleFlow, RejectsNonPositive) {
  EXPECT_THROW(scale_flow(FlowField(2, 2), 0, 1), ArgumentError);
  EXPECT_THROW(scale_flow(FlowField(2, 2), 1, -1), ArgumentError);
}

TEST(EndpointError, Basics) {
  FlowField a(3, 3), b(3, 3);
  EXPECT_EQ(endpoint_error(a, b), ScalarMap(3, 3));
  b(1, 2) = {3, 4};
  EXPECT_FLOAT_EQ(endpoint_error(a, b)(1, 2), 5.0f);
  EXPECT_THROW(endpoint_error(a, FlowField(2, 3)), DimensionError);
}

TEST(EndpointError, RandomMatchesOracleAndIsSymmetric) {
  std::mt19937 rng(5);
  const FlowField a = random_field(rng, 9, 7, -4, 4), b = random_field(rng, 9, 7, -4, 4);
  const ScalarMap e = endpoint_error(a, b), r = endpoint_error(b, a);
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double dx = double(a[i].x) - b[i].x, dy = double(a[i].y) - b[i].y;
    EXPECT_NEAR(e[i], std::sqrt(dx * dx + dy * dy), 1e-5);
    EXPECT_EQ(e[i], r[i]);
    EXPECT_GT(e[i], 0.0f);
  }
}

TEST(ImageOps, DownsampleBoxAveragesBlocks) {
  Image img(3, 2);
  for (int y = 0; y < 2; ++y)
    for (int x = 0; x < 3; ++x) img(x, y) = float(x + 3 * y);
  const Image d = downsample_box(img, 2);
  ASSERT_EQ(d.resolution(), (Resolution{2, 1}));
  EXPECT_FLOAT_EQ(d(0, 0), (0 + 1 + 3 + 4) / 4.0f);
  EXPECT_FLOAT_EQ(d(1, 0), (2 + 5) / 2.0f);
}

TEST(ImageOps, BoxSumMatchesLoop) {
  std::mt19937 rng(6);
  std::uniform_real_distribution<float> u(0, 1);
  Image img(7, 6);
  for (auto& v : img.pixels()) v = u(rng);
  const Image s = box_sum(img, 2);
  for (int y = 0; y < 6; ++y) {
    for (int x = 0; x < 7; ++x) {
      double acc = 0;
      for (int yy = std::max(0, y - 2); yy <= std::min(5, y + 2); ++yy)
        for (int xx = std::max(0, x - 2); xx <= std::min(6, x + 2); ++xx) acc += img(xx, yy);
      EXPECT_NEAR(s(x, y), acc, 1e-5);
    }
  }
}

TEST(ImageOps, CentralGradientsOfRamp) {
  Image img(5, 4);
  for (int y = 0; y < 4; ++y)
    for (int x = 0; x < 5; ++x) img(x, y) = float(2 * x - 3 * y);
  const Gradients g = central_gradients(img);
  for (std::size_t i = 0; i < img.size(); ++i) {
    EXPECT_FLOAT_EQ(g.gx[i], 2.0f);
    EXPECT_FLOAT_EQ(g.gy[i], -3.0f);
  }
}

TEST(ImageOps, WarpIntegerShiftCopies) {
  std::mt19937 rng(7);
  std::uniform_real_distribution<float> u(0, 1);
  Image img(8, 8);
  for (auto& v : img.pixels()) v = u(rng);
  const Image w = warp_image(img, FlowField(8, 8, {2, -1}));
  for (int y = 1; y < 8; ++y)
    for (int x = 0; x < 6; ++x) EXPECT_EQ(w(x, y), img(x + 2, y - 1));
  EXPECT_EQ(warp_image(img, FlowField(8, 8)), img);
}

TEST(Flo, RoundTripBitExact) {
  std::mt19937 rng(8);
  const fs::path dir = temp_dir("flo");
  for (int k = 0; k < 20; ++k) {
    const FlowField f = random_field(rng, 1 + k % 7, 1 + k % 5, -100, 100);
    save_flo(f, dir / "f.flo");
    const FlowField g = load_flo(dir / "f.flo");
    ASSERT_EQ(g.resolution(), f.resolution());
    EXPECT_EQ(std::memcmp(g.pixels().data(), f.pixels().data(), f.size() * sizeof(Vec2f)), 0);
  }
}

TEST(Flo, HandBuiltOnePixel) {
  std::vector<std::uint8_t> bytes(20);
  const float tag = 202021.25f, vx = 1.5f, vy = -2.0f;
  const std::int32_t one = 1;
  std::memcpy(&bytes[0], &tag, 4);
  std::memcpy(&bytes[4], &one, 4);
  std::memcpy(&bytes[8], &one, 4);
  std::memcpy(&bytes[12], &vx, 4);
  std::memcpy(&bytes[16], &vy, 4);
  const FlowField f = decode_flo(bytes);
  ASSERT_EQ(f.resolution(), (Resolution{1, 1}));
  EXPECT_EQ(f(0, 0), (Vec2f{1.5f, -2.0f}));
  EXPECT_EQ(encode_flo(f), bytes);
}

TEST(Flo, Errors) {
  std::vector<std::uint8_t> zero_tag(20, 0);
  EXPECT_THROW(decode_flo(zero_tag), FormatError);
  std::vector<std::uint8_t> good = encode_flo(FlowField(2, 2));
  EXPECT_EQ(good.size(), 4u + 8u + 32u);
  good.pop_back();
  EXPECT_THROW(decode_flo(good), LengthError);
  std::vector<std::uint8_t> bad_dims = encode_flo(FlowField(1, 1));
  const std::int32_t neg = -1;
  std::memcpy(&bad_dims[4], &neg, 4);
  EXPECT_THROW(decode_flo(bad_dims), FormatError);
  EXPECT_THROW(save_flo(FlowField(1, 1), "/nonexistent_dir_mftiq/x.flo"), IoError);
}

TEST(Flo, OverwriteSucceeds) {
  const fs::path dir = temp_dir("flo_over");
  save_flo(FlowField(3, 3, {1, 1}), dir / "a.flo");
  save_flo(FlowField(2, 2, {2, 2}), dir / "a.flo");
  EXPECT_EQ(load_flo(dir / "a.flo"), FlowField(2, 2, {2, 2}));
}

TEST(Png, GrayRgbIndexedRoundTrip) {
  const fs::path dir = temp_dir("png");
  Gray8 g(5, 3);
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = std::uint8_t(i * 17);
  write_png(dir / "g.png", g);
  EXPECT_EQ(read_png_gray(dir / "g.png"), g);

  RgbImage c(4, 2);
  for (std::size_t i = 0; i < c.size(); ++i) c[i] = {std::uint8_t(i), std::uint8_t(40 * i), std::uint8_t(255 - i)};
  write_png(dir / "c.png", c);
  EXPECT_EQ(read_png_rgb(dir / "c.png"), c);

  Gray8 idx(3, 3);
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = std::uint8_t(i % 3);
  write_png_indexed(dir / "i.png", idx, {{0, 0, 0}, {255, 0, 0}, {0, 255, 0}});
  EXPECT_EQ(read_png_indices(dir / "i.png"), idx);
  EXPECT_THROW(write_png_indexed(dir / "j.png", idx, {{0, 0, 0}}), ArgumentError);
}

TEST(Png, NotPngIsFormatError) {
  const fs::path dir = temp_dir("png_bad");
  write_file_atomic(dir / "x.png", std::string_view("hello"));
  EXPECT_THROW(read_png_gray(dir / "x.png"), FormatError);
}

TEST(Png, OcclusionQuantization) {
  OcclusionMap o(3, 1);
  o[0] = 0.0f;
  o[1] = 1.0f;
  o[2] = 0.5f;
  const Gray8 g = occlusion_to_gray8(o);
  EXPECT_EQ(g[0], 0);
  EXPECT_EQ(g[1], 255);
  EXPECT_EQ(g[2], 128);
}
