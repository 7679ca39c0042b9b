#include <cmath>
#include <fstream>

#include "cftrack/error.hpp"
#include "cftrack/synth.hpp"
#include "support.hpp"

using namespace cftrack;

namespace {

using Point = std::array<double, 2>;

// Polygon clipping against an axis-aligned rectangle, then the shoelace formula.
std::vector<Point> clip_polygon(std::vector<Point> poly, const Box& r) {
  auto clip = [&](auto inside, auto cross) {
    std::vector<Point> out;
    for (std::size_t i = 0; i < poly.size(); ++i) {
      const Point a = poly[i], b = poly[(i + 1) % poly.size()];
      const bool ia = inside(a), ib = inside(b);
      if (ia) out.push_back(a);
      if (ia != ib) out.push_back(cross(a, b));
    }
    poly = out;
  };
  auto at_x = [](double x) {
    return [x](Point a, Point b) { return Point{x, a[1] + (b[1] - a[1]) * (x - a[0]) / (b[0] - a[0])}; };
  };
  auto at_y = [](double y) {
    return [y](Point a, Point b) { return Point{a[0] + (b[0] - a[0]) * (y - a[1]) / (b[1] - a[1]), y}; };
  };
  clip([&](Point p) { return p[0] >= r.x; }, at_x(r.x));
  clip([&](Point p) { return p[0] <= r.right(); }, at_x(r.right()));
  clip([&](Point p) { return p[1] >= r.y; }, at_y(r.y));
  clip([&](Point p) { return p[1] <= r.bottom(); }, at_y(r.bottom()));
  return poly;
}

double polygon_area(const std::vector<Point>& p) {
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const auto& a = p[i];
    const auto& b = p[(i + 1) % p.size()];
    s += a[0] * b[1] - b[0] * a[1];
  }
  return 0.5 * std::abs(s);
}

double overlap_fraction(const Box& target, const Box& other) {
  const std::vector<Point> poly{{target.x, target.y}, {target.right(), target.y}, {target.right(), target.bottom()},
                                {target.x, target.bottom()}};
  return polygon_area(clip_polygon(poly, other)) / target.area();
}

Visibility oracle_visibility(const Box& t, const std::optional<Box>& occ, int w, int h) {
  if (t.cx() < 0 || t.cy() < 0 || t.cx() >= w || t.cy() >= h) return Visibility::kAbsent;
  const double covered = occ ? overlap_fraction(t, *occ) : 0.0;
  if (covered >= 0.95) return Visibility::kFullOcclusion;
  if (covered >= 0.20) return Visibility::kPartialOcclusion;
  const double outside = 1.0 - overlap_fraction(t, Box{0, 0, double(w), double(h)});
  if (outside >= 0.10) return Visibility::kFrameCut;
  return Visibility::kClear;
}

SyntheticSceneConfig short_scene(std::uint64_t seed) {
  SyntheticSceneConfig c;
  c.length = 60;
  c.seed = seed;
  return c;
}

}  // namespace

TEST_SUITE("data-synth") {

TEST_CASE("visibility tokens") {
  for (Visibility v : kAllVisibilities) CHECK(parse_visibility(to_string(v)) == v);
  CHECK_FALSE(parse_visibility("XX").has_value());
  CHECK(std::string(to_string(Visibility::kFrameCut)) == "FC");
}

TEST_CASE("generation is deterministic") {
  const auto a = generate_sequence(short_scene(42));
  const auto b = generate_sequence(short_scene(42));
  CHECK(same_content(a, b));
  CHECK(a.frames == b.frames);
  const auto c = generate_sequence(short_scene(43));
  CHECK_FALSE(same_content(a, c));
  CHECK(a.length() == 60);
  CHECK(a.annotations.size() == a.frames.size());
  CHECK(a.frame_width() == 384);
}

TEST_CASE("labels agree with an exact overlap oracle") {
  int occluded = 0, full = 0;
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    const auto s = generate_sequence(short_scene(seed));
    for (int f = 0; f < s.length(); ++f) {
      const auto& ann = s.annotations[f];
      CHECK(ann.visibility == oracle_visibility(s.truth.target[f], s.truth.occluder[f], 384, 384));
      CHECK(ann.box.has_value() == (ann.visibility != Visibility::kAbsent));
      if (ann.box) {
        CHECK(ann.box->w > 0);
        CHECK(ann.box->h > 0);
      }
      occluded += ann.visibility == Visibility::kPartialOcclusion;
      full += ann.visibility == Visibility::kFullOcclusion;
    }
  }
  CHECK(occluded > 0);
  CHECK(full > 0);
}

TEST_CASE("classification thresholds") {
  const Box t{100, 100, 40, 40};
  CHECK(classify_visibility(t, std::nullopt, 384, 384) == Visibility::kClear);
  CHECK(classify_visibility(t, Box{100, 100, 40, 38.5}, 384, 384) == Visibility::kFullOcclusion);
  CHECK(classify_visibility(t, Box{100, 100, 40, 37.5}, 384, 384) == Visibility::kPartialOcclusion);
  CHECK(classify_visibility(t, Box{100, 100, 40, 8}, 384, 384) == Visibility::kPartialOcclusion);
  CHECK(classify_visibility(t, Box{100, 100, 40, 7}, 384, 384) == Visibility::kClear);
  CHECK(classify_visibility(Box{-5, 100, 40, 40}, std::nullopt, 384, 384) == Visibility::kFrameCut);
  CHECK(classify_visibility(Box{-3, 100, 40, 40}, std::nullopt, 384, 384) == Visibility::kClear);
  CHECK(classify_visibility(Box{-25, 100, 40, 40}, std::nullopt, 384, 384) == Visibility::kAbsent);
}

TEST_CASE("event structure") {
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    const auto s = generate_sequence(short_scene(seed));
    int clear = 0;
    for (int f = 0; f < s.length(); ++f) {
      const auto v = s.annotations[f].visibility;
      clear += v == Visibility::kClear;
      if (f == 0) continue;
      const auto prev = s.annotations[f - 1].visibility;
      // Full occlusion is entered and left through partial occlusion.
      if (v == Visibility::kFullOcclusion) CHECK(prev != Visibility::kClear);
      if (prev == Visibility::kFullOcclusion) CHECK(v != Visibility::kClear);
    }
    CHECK(s.annotations[0].visibility == Visibility::kClear);
    CHECK(clear > 0);
  }
}

TEST_CASE("occluder disabled") {
  auto c = short_scene(5);
  c.occluder_enabled = false;
  for (std::uint64_t seed = 5; seed < 8; ++seed) {
    c.seed = seed;
    for (const auto& a : generate_sequence(c).annotations) {
      CHECK(a.visibility != Visibility::kPartialOcclusion);
      CHECK(a.visibility != Visibility::kFullOcclusion);
    }
  }
}

TEST_CASE("scene validation") {
  auto c = short_scene(1);
  c.num_distractors = 40;
  CHECK_THROWS_AS(generate_sequence(c), ConfigError);
  c = short_scene(1);
  c.length = 1;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = short_scene(1);
  c.frame_width = 100;
  CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("crop that exactly matches the box") {
  Image frame(300, 300, 0);
  for (int y = 50; y < 194; ++y) {
    for (int x = 60; x < 204; ++x) {
      auto* p = frame.pixel(x, y);
      p[0] = 255;
      p[1] = 40;
    }
  }
  const auto patch = crop_patch(frame, Box{60, 50, 144, 144}, 1.0, 144);
  CHECK(patch.shape() == Shape{3, 144, 144});
  for (int i = 0; i < 144 * 144; ++i) {
    CHECK(patch[i] == 1.0f);
    CHECK(patch[144 * 144 + i] == doctest::Approx(40.0 / 255.0));
    CHECK(patch[2 * 144 * 144 + i] == 0.0f);
  }
}

TEST_CASE("crop padding is zero outside the frame") {
  Image frame(200, 200, 180);
  const Box box{5, 10, 40, 40};
  const auto tr = crop_transform(box, kSearchContext, 272);
  const auto patch = crop_patch(frame, tr, 272);
  int padded = 0;
  for (int i = 0; i < 272; ++i) {
    for (int j = 0; j < 272; ++j) {
      const Box px = tr.to_frame(Box{double(j), double(i), 1.0, 1.0});
      if (px.right() < -1.0 || px.bottom() < -1.0) {
        ++padded;
        for (int c = 0; c < 3; ++c) CHECK(patch[(c * 272 + i) * 272 + j] == 0.0f);
      }
    }
  }
  CHECK(padded > 1000);
  CHECK(patch[(0 * 272 + 200) * 272 + 200] == doctest::Approx(180.0 / 255.0));
}

TEST_CASE("crop coordinate round trip") {
  Rng rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    const Box box{rng.uniform(0, 300), rng.uniform(0, 300), rng.uniform(10, 80), rng.uniform(10, 80)};
    const Box other{rng.uniform(0, 300), rng.uniform(0, 300), rng.uniform(10, 80), rng.uniform(10, 80)};
    const auto tr = crop_transform(box, kSearchContext, 272);
    const Box back = tr.to_frame(tr.to_crop(other));
    CHECK(std::abs(back.x - other.x) <= 0.5);
    CHECK(std::abs(back.y - other.y) <= 0.5);
    CHECK(std::abs(back.right() - other.right()) <= 0.5);
    CHECK(std::abs(back.bottom() - other.bottom()) <= 0.5);
    const Box centred = tr.to_crop(box);
    CHECK(centred.cx() == doctest::Approx(136.0));
    CHECK(centred.cy() == doctest::Approx(136.0));
  }
  CHECK(kSearchContext == doctest::Approx(3.7777778));
}

TEST_CASE("degenerate crop box") {
  Image frame(64, 64, 0);
  CHECK_THROWS_AS(crop_patch(frame, Box{10, 10, 0, 5}, 2.0, 144), DegenerateInputError);
  CHECK_THROWS_AS(crop_transform(Box{10, 10, 5, -1}, 2.0, 144), DegenerateInputError);
}

TEST_CASE("flip is an involution and keeps boxes in bounds") {
  const auto original = testing::random_tensor<float>({3, 16, 16}, 4, 0.0, 1.0);
  auto patch = original.clone();
  Box box{2, 3, 5, 7};
  flip_horizontal(patch, box);
  CHECK(box == Box{9, 3, 5, 7});
  flip_horizontal(patch, box);
  CHECK(box == Box{2, 3, 5, 7});
  CHECK(std::equal(patch.data().begin(), patch.data().end(), original.data().begin()));

  for (int x = 0; x <= 16; x += 2) {
    for (int w = 1; x + w <= 16; w += 3) {
      auto p = Tensor<float>({3, 16, 16});
      Box b{double(x), 0, double(w), 4};
      flip_horizontal(p, b);
      CHECK(b.x >= 0.0);
      CHECK(b.right() <= 16.0);
    }
  }
}

TEST_CASE("brightness and augmentation") {
  const auto original = testing::random_tensor<float>({3, 8, 8}, 5, 0.0, 1.0);
  auto same = original.clone();
  apply_brightness(same, 1.0);
  CHECK(std::equal(same.data().begin(), same.data().end(), original.data().begin()));
  auto bright = original.clone();
  apply_brightness(bright, 1.4);
  for (float v : bright.data()) CHECK(v <= 1.0f);

  int flips = 0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const auto a = augment(original, Box{1, 1, 3, 3}, seed);
    const auto b = augment(original, Box{1, 1, 3, 3}, seed);
    CHECK(a.flipped == b.flipped);
    CHECK(a.brightness == b.brightness);
    CHECK(std::equal(a.patch.data().begin(), a.patch.data().end(), b.patch.data().begin()));
    CHECK(a.brightness >= 0.6);
    CHECK(a.brightness <= 1.4);
    for (float v : a.patch.data()) {
      CHECK(v >= 0.0f);
      CHECK(v <= 1.0f);
    }
    CHECK(a.box.x == (a.flipped ? 4.0 : 1.0));
    flips += a.flipped;
  }
  CHECK(flips > 70);
  CHECK(flips < 130);
}

TEST_CASE("annotation lines") {
  const auto a = parse_annotation_line("12.0,34.0,50.0,40.0,CL", 1);
  REQUIRE(a.box.has_value());
  CHECK(*a.box == Box{12, 34, 50, 40});
  CHECK(a.visibility == Visibility::kClear);
  const auto ab = parse_annotation_line("NaN,NaN,NaN,NaN,AB", 2);
  CHECK_FALSE(ab.box.has_value());
  CHECK(format_annotation_line(ab) == "NaN,NaN,NaN,NaN,AB");
  try {
    parse_annotation_line("12,34,50,40,XX", 7);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("XX") != std::string::npos);
    CHECK(msg.find('7') != std::string::npos);
  }
  CHECK_THROWS_AS(parse_annotation_line("12,34,50,CL", 1), ParseError);
  CHECK_THROWS_AS(parse_annotation_line("12,34,-50,40,CL", 1), ParseError);
  CHECK_THROWS_AS(parse_annotation_line("1,2,3,4,AB", 1), ParseError);

  const FrameAnnotation odd{Box{0.1, 1.0 / 3.0, 47.25, 1e-3}, Visibility::kPartialOcclusion};
  CHECK(parse_annotation_line(format_annotation_line(odd), 1) == odd);
}

TEST_CASE("sequence and dataset round trip") {
  testing::TempDir dir("synth");
  const auto s = generate_sequence(short_scene(9));
  save_sequence(s, dir / "one");
  CHECK(std::filesystem::exists(dir / "one" / "frames" / "frame_000000.ppm"));
  CHECK(std::filesystem::exists(dir / "one" / "groundtruth.txt"));
  CHECK(std::filesystem::exists(dir / "one" / "meta.txt"));
  const auto loaded = load_sequence(dir / "one");
  CHECK(same_content(s, loaded));
  CHECK(loaded.seed == s.seed);

  auto base = short_scene(0);
  base.length = 12;
  const auto data = generate_dataset(base, 3, 77);
  CHECK(data[1].id == "seq_0001");
  save_dataset(data, dir / "ds");
  const auto back = load_dataset(dir / "ds");
  REQUIRE(back.size() == 3);
  for (int i = 0; i < 3; ++i) {
    CHECK(back[i].id == data[i].id);
    CHECK(same_content(back[i], data[i]));
  }
}

TEST_CASE("malformed ground truth names the line") {
  testing::TempDir dir("synth_bad");
  auto c = short_scene(2);
  c.length = 5;
  save_sequence(generate_sequence(c), dir / "s");
  {
    std::ofstream out(dir / "s" / "groundtruth.txt", std::ios::app);
    out << "1,2,3\n";
  }
  try {
    load_sequence(dir / "s");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find('6') != std::string::npos);
  }
}

TEST_CASE("ppm round trip") {
  testing::TempDir dir("ppm");
  Image img(5, 3, 0);
  for (std::size_t i = 0; i < img.bytes().size(); ++i) img.bytes()[i] = static_cast<std::uint8_t>(i * 7);
  write_ppm(img, dir / "a.ppm");
  CHECK(read_ppm(dir / "a.ppm") == img);
}

}  // TEST_SUITE
