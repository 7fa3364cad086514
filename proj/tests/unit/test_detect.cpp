#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "duotrack/detect.hpp"
#include "duotrack/errors.hpp"
#include "oracles.hpp"

using namespace duotrack;

namespace {

Tensor crop(const Tensor& src, int y0, int x0, int h, int w) {
  Tensor out(src.channels(), h, w);
  for (int c = 0; c < src.channels(); ++c)
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) out.at(c, y, x) = src.at(c, y0 + y, x0 + x);
  return out;
}

Cell oracle_argmax(const oracle::Grid& g) {
  int best = 0;
  for (int i = 1; i < g.h * g.w; ++i) {
    if (g.v[i] > g.v[best]) best = i;
  }
  return {best % g.w, best / g.w};
}

HeadConfig corr_head(CorrelationMode mode) {
  HeadConfig h;
  h.kind = HeadKind::corr_peak;
  h.correlation = mode;
  return h;
}

}  // namespace

TEST(CellToImage, Examples) {
  EXPECT_EQ(cell_to_image({0, 0}, 8, 4.0), (Point{4, 4}));
  EXPECT_EQ(cell_to_image({3, 1}, 8, 4.0), (Point{28, 12}));
  for (int x = 0; x < 5; ++x)
    for (int y = 0; y < 5; ++y) EXPECT_EQ(cell_to_image({x, y}, 1, 0.0), (Point{double(x), double(y)}));
  const GridSpec g = GridSpec::centered(4, 4, 8);
  EXPECT_EQ(cell_to_image({3, 1}, g), (Point{28, 12}));
}

TEST(EncodeTargets, ExampleDistances) {
  const GridSpec g{12, 12, 1, 0.0, 0.0};
  const RegressionField f = encode_targets({2, 3, 10, 9}, g);
  const std::size_t i = f.index({5, 4});
  EXPECT_EQ(f.positive[i], 1);
  EXPECT_EQ(f.left[i], 3);
  EXPECT_EQ(f.top[i], 1);
  EXPECT_EQ(f.right[i], 5);
  EXPECT_EQ(f.bottom[i], 5);
  const std::size_t o = f.index({0, 0});
  EXPECT_EQ(f.positive[o], 0);
  EXPECT_EQ(f.left[o] + f.top[o] + f.right[o] + f.bottom[o], 0.0);
}

TEST(EncodeTargets, BoundaryCellsAreNegative) {
  const GridSpec g{12, 12, 1, 0.0, 0.0};
  const RegressionField f = encode_targets({2, 3, 10, 9}, g);
  EXPECT_EQ(f.positive[f.index({2, 5})], 0);
  EXPECT_EQ(f.positive[f.index({10, 5})], 0);
  EXPECT_EQ(f.positive[f.index({5, 3})], 0);
  EXPECT_EQ(f.positive[f.index({5, 9})], 0);
  // (x 3..9) x (y 4..8)
  EXPECT_EQ(f.positive_count(), 7u * 5u);
}

TEST(EncodeTargets, PositiveCountMatchesBruteForceScan) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-20.0, 140.0);
  std::uniform_int_distribution<int> stride_d(1, 8);
  for (int trial = 0; trial < 300; ++trial) {
    const int stride = stride_d(rng);
    const GridSpec g = GridSpec::centered(16, 15, stride);
    double a = u(rng), b = u(rng), c = u(rng), d = u(rng);
    if (a == b || c == d) continue;
    const AxisBox gt{std::min(a, b), std::min(c, d), std::max(a, b), std::max(c, d)};
    std::size_t expected = 0;
    for (int y = 0; y < 16; ++y)
      for (int x = 0; x < 15; ++x) {
        const double px = x * stride + 0.5 * stride, py = y * stride + 0.5 * stride;
        if (px > gt.x0 && px < gt.x1 && py > gt.y0 && py < gt.y1) ++expected;
      }
    const RegressionField f = encode_targets(gt, g);
    EXPECT_EQ(f.positive_count(), expected);
    for (std::size_t i = 0; i < f.positive.size(); ++i) {
      if (!f.positive[i]) continue;
      EXPECT_GT(f.left[i], 0);
      EXPECT_GT(f.top[i], 0);
      EXPECT_GT(f.right[i], 0);
      EXPECT_GT(f.bottom[i], 0);
    }
  }
}

TEST(EncodeTargets, BoxOutsideGridIsAllNegative) {
  const RegressionField f = encode_targets({500, 500, 600, 600}, GridSpec::centered(8, 8, 8));
  EXPECT_EQ(f.positive_count(), 0u);
  EXPECT_THROW(encode_targets({5, 5, 5, 9}, GridSpec::centered(8, 8, 8)), DegenerateRegionError);
}

TEST(DecodeBox, Examples) {
  EXPECT_EQ(decode_box(5, 4, 3, 1, 5, 5), (AxisBox{2, 3, 10, 9}));
  EXPECT_EQ(decode_box(10, 10, 2, 2, 2, 2), (AxisBox{8, 8, 12, 12}));
  EXPECT_THROW(decode_box(10, 10, 0, 2, 0, 2), DegenerateRegionError);
  EXPECT_THROW(decode_box(10, 10, 2, 0, 2, 0), DegenerateRegionError);
  EXPECT_THROW(decode_box(10, 10, -1, 2, 2, 2), DegenerateRegionError);
}

// Integer-valued coordinates keep every subtraction and addition exact.
TEST(DecodeBox, RoundTripWithEncodeIsExact) {
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<int> coord(0, 200);
  int checked = 0;
  while (checked < 1000) {
    const int a = coord(rng), b = coord(rng), c = coord(rng), d = coord(rng);
    if (std::abs(a - b) < 2 || std::abs(c - d) < 2) continue;
    const AxisBox gt{double(std::min(a, b)), double(std::min(c, d)), double(std::max(a, b)), double(std::max(c, d))};
    const GridSpec g{201, 201, 1, 0.0, 0.0};
    std::uniform_int_distribution<int> px(int(gt.x0) + 1, int(gt.x1) - 1);
    std::uniform_int_distribution<int> py(int(gt.y0) + 1, int(gt.y1) - 1);
    const Cell cell{px(rng), py(rng)};
    const RegressionField f = encode_targets(gt, g);
    const std::size_t i = f.index(cell);
    ASSERT_EQ(f.positive[i], 1);
    const Point p = cell_to_image(cell, g);
    EXPECT_EQ(decode_box(p.x, p.y, f.left[i], f.top[i], f.right[i], f.bottom[i]), gt);
    ++checked;
  }
}

TEST(ConstantSizeField, EveryCellPredictsTheSameSize) {
  const GridSpec g = GridSpec::centered(3, 4, 8);
  const RegressionField f = constant_size_field(g, 10, 6);
  EXPECT_EQ(f.positive_count(), 12u);
  const Point p = cell_to_image({2, 1}, g);
  const std::size_t i = f.index({2, 1});
  EXPECT_EQ(decode_box(p.x, p.y, f.left[i], f.top[i], f.right[i], f.bottom[i]),
            AxisBox::from_center(p, 10, 6));
  EXPECT_THROW(constant_size_field(g, 0, 6), DegenerateRegionError);
}

TEST(MinMaxNormalize, ConstantMapIsHalf) {
  EXPECT_EQ(min_max_normalize(Tensor(1, 4, 5, 3.0f)), Tensor(1, 4, 5, 0.5f));
  Tensor r(1, 1, 3, std::vector<float>{2, 4, 6});
  EXPECT_EQ(min_max_normalize(r), Tensor(1, 1, 3, std::vector<float>{0, 0.5f, 1}));
}

TEST(CosineWindow, ZeroInfluenceIsIdentityAndFullInfluenceIsWindow) {
  std::mt19937_64 rng(1);
  const Tensor s = oracle::random_tensor(rng, 1, 9, 9, 0.0, 1.0);
  EXPECT_EQ(apply_cosine_window(s, 0.0), s);
  const Tensor w = apply_cosine_window(s, 1.0);
  float best = -1;
  Cell at{};
  for (int y = 0; y < 9; ++y)
    for (int x = 0; x < 9; ++x) {
      if (w.at(0, y, x) > best) best = w.at(0, y, x), at = {x, y};
      EXPECT_NEAR(w.at(0, y, x), w.at(0, x, y), 1e-7);
    }
  EXPECT_EQ(at, (Cell{4, 4}));
  EXPECT_FLOAT_EQ(best, 1.0f);
}

TEST(DetectionHead, ConfigValidation) {
  HeadConfig h;
  h.aggregate_layers = 0;
  EXPECT_THROW(DetectionHead(h, BackboneConfig::identity()), ConfigError);
  h = HeadConfig{};
  h.window_influence = 1.5;
  EXPECT_THROW(DetectionHead(h, BackboneConfig::identity()), ConfigError);
  h = HeadConfig{};
  h.kind = HeadKind::conv;
  h.tower_channels = 0;
  EXPECT_THROW(DetectionHead(h, BackboneConfig::layout("default")), ConfigError);
}

TEST(Classify, CopyOfTemplateIsFoundAtItsOffset) {
  std::mt19937_64 rng(4);
  const Backbone b(BackboneConfig::identity());
  for (int trial = 0; trial < 10; ++trial) {
    const Tensor search = oracle::random_tensor(rng, 3, 40, 44, 0.0, 1.0);
    std::uniform_int_distribution<int> oy(0, 40 - 12), ox(0, 44 - 10);
    const int y0 = oy(rng), x0 = ox(rng);
    const Tensor tmpl = crop(search, y0, x0, 12, 10);
    const FeaturePyramid tp = b.extract(tmpl), sp = b.extract(search);

    const DetectionHead ncc(corr_head(CorrelationMode::normalized), b.config());
    const Tensor s = ncc.classify(tp, sp);
    const Detection d = select_best(s, constant_size_field(ncc.grid(tp, sp), 10, 12));
    EXPECT_EQ(d.cell, (Cell{x0, y0}));
    EXPECT_EQ(d.box, (AxisBox{double(x0), double(y0), double(x0 + 10), double(y0 + 12)}));

    // Raw mode follows the plain sliding dot product.
    const DetectionHead raw(corr_head(CorrelationMode::raw), b.config());
    const Tensor r = raw.classify(tp, sp);
    const Cell expect = oracle_argmax(oracle::cross_correlate(tmpl, search, CorrelationMode::raw));
    EXPECT_EQ(select_best(r, constant_size_field(raw.grid(tp, sp), 10, 12)).cell, expect);
  }
}

TEST(Classify, ScoresBoundedForRandomInputs) {
  std::mt19937_64 rng(12);
  const Backbone id(BackboneConfig::identity());
  const Backbone conv(BackboneConfig::layout("slim", 2));
  HeadConfig convh;
  convh.kind = HeadKind::conv;
  convh.tower_channels = 8;
  for (int trial = 0; trial < 4; ++trial) {
    const Tensor t = oracle::random_tensor(rng, 3, 16, 16, -3.0, 3.0);
    const Tensor s = oracle::random_tensor(rng, 3, 48, 48, -3.0, 3.0);
    for (auto mode : {CorrelationMode::raw, CorrelationMode::normalized}) {
      const Tensor sc = DetectionHead(corr_head(mode), id.config()).classify(id.extract(t), id.extract(s));
      for (float v : sc.data()) {
        EXPECT_GE(v, 0.0f);
        EXPECT_LE(v, 1.0f);
      }
    }
    const DetectionHead head(convh, conv.config());
    const auto tp = conv.extract(t), sp = conv.extract(s);
    const Tensor sc = head.classify(tp, sp);
    const GridSpec g = head.grid(tp, sp);
    EXPECT_EQ(sc.height(), g.height);
    EXPECT_EQ(sc.width(), g.width);
    for (float v : sc.data()) {
      EXPECT_GE(v, 0.0f);
      EXPECT_LE(v, 1.0f);
    }
    const RegressionField reg = head.regress(tp, sp);
    for (std::size_t i = 0; i < reg.positive.size(); ++i) {
      EXPECT_GT(reg.left[i], 0);
      EXPECT_GT(reg.bottom[i], 0);
    }
  }
}

TEST(Classify, ConvHeadOnDefaultLayoutGives32Grid) {
  const Backbone b(BackboneConfig::layout("default"));
  HeadConfig h;
  h.kind = HeadKind::conv;
  h.tower_channels = 4;
  const DetectionHead head(h, b.config());
  const auto tp = b.extract(Tensor(3, 127, 127, 0.2f));
  const auto sp = b.extract(Tensor(3, 255, 255, 0.4f));
  const GridSpec g = head.grid(tp, sp);
  EXPECT_EQ(g.height, 32);
  EXPECT_EQ(g.width, 32);
  EXPECT_EQ(g.stride, 8);
}

TEST(Classify, PyramidMismatchIsShapeError) {
  const Backbone id(BackboneConfig::identity());
  const Backbone conv(BackboneConfig::layout("slim"));
  const DetectionHead head(corr_head(CorrelationMode::raw), id.config());
  EXPECT_THROW(head.classify(id.extract(Tensor(3, 8, 8)), conv.extract(Tensor(3, 32, 32))), ShapeError);

  FeaturePyramid a = conv.extract(Tensor(3, 16, 16));
  FeaturePyramid s = conv.extract(Tensor(3, 48, 48));
  s.stages[1].stride = 3;
  EXPECT_THROW(DetectionHead(corr_head(CorrelationMode::raw), conv.config()).classify(a, s), ShapeError);
  EXPECT_THROW(head.classify(id.extract(Tensor(3, 20, 20)), id.extract(Tensor(3, 10, 10))), ShapeError);
}

TEST(Classify, RegressRequiresConvHead) {
  const Backbone id(BackboneConfig::identity());
  const DetectionHead head(corr_head(CorrelationMode::raw), id.config());
  EXPECT_THROW(head.regress(id.extract(Tensor(3, 4, 4)), id.extract(Tensor(3, 8, 8))), ArgumentError);
}

TEST(Classify, TranslationMovesArgmaxByDelta) {
  std::mt19937_64 rng(31);
  const Backbone b(BackboneConfig::identity());
  const DetectionHead head(corr_head(CorrelationMode::normalized), b.config());
  const Tensor big = oracle::random_tensor(rng, 3, 64, 64, 0.0, 1.0);
  const Tensor tmpl = crop(big, 26, 26, 10, 10);
  const auto tp = b.extract(tmpl);
  const Tensor base = crop(big, 8, 8, 48, 48);
  const auto base_cell = select_best(head.classify(tp, b.extract(base)), constant_size_field(head.grid(tp, b.extract(base)), 10, 10)).cell;
  for (int dx = -5; dx <= 5; dx += 5) {
    for (int dy = -7; dy <= 7; dy += 7) {
      const Tensor moved = crop(big, 8 - dy, 8 - dx, 48, 48);
      const auto sp = b.extract(moved);
      const Cell c = select_best(head.classify(tp, sp), constant_size_field(head.grid(tp, sp), 10, 10)).cell;
      EXPECT_EQ(c.x - base_cell.x, dx);
      EXPECT_EQ(c.y - base_cell.y, dy);
    }
  }
}

TEST(SelectBest, ExamplesAndTieBreak) {
  const GridSpec g = GridSpec::centered(3, 4, 8);
  const RegressionField f = constant_size_field(g, 8, 8);
  Tensor s(1, 3, 4, 0.1f);
  s.at(0, 2, 1) = 0.9f;
  Detection d = select_best(s, f);
  EXPECT_EQ(d.cell, (Cell{1, 2}));
  EXPECT_EQ(d.box, (AxisBox{8, 16, 16, 24}));
  EXPECT_FLOAT_EQ(d.score, 0.9f);

  s.at(0, 1, 3) = 0.9f;
  EXPECT_EQ(select_best(s, f).cell, (Cell{3, 1}));

  EXPECT_EQ(select_best(Tensor(1, 3, 4, 0.3f), f).cell, (Cell{0, 0}));
  EXPECT_THROW(select_best(Tensor(), f), ArgumentError);
  EXPECT_THROW(select_best(Tensor(1, 4, 3), f), ShapeError);
}

TEST(SelectBest, ScalingScoresKeepsSelectedCell) {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> k(0.01, 100.0);
  const GridSpec g = GridSpec::centered(9, 11, 8);
  const RegressionField f = constant_size_field(g, 5, 5);
  for (int trial = 0; trial < 50; ++trial) {
    const Tensor s = oracle::random_tensor(rng, 1, 9, 11, 0.0, 1.0);
    Tensor scaled = s;
    const float factor = static_cast<float>(k(rng));
    for (float& v : scaled.data()) v *= factor;
    EXPECT_EQ(select_best(scaled, f).cell, select_best(s, f).cell);
  }
}
