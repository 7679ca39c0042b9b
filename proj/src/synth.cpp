#include "cftrack/synth.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>

#include "cftrack/error.hpp"
#include "cftrack/rng.hpp"

namespace cftrack {

const char* to_string(Visibility v) {
  switch (v) {
    case Visibility::kClear: return "CL";
    case Visibility::kPartialOcclusion: return "PO";
    case Visibility::kFullOcclusion: return "FO";
    case Visibility::kFrameCut: return "FC";
    case Visibility::kAbsent: return "AB";
  }
  return "??";
}

std::optional<Visibility> parse_visibility(std::string_view token) {
  for (Visibility v : kAllVisibilities) {
    if (token == to_string(v)) return v;
  }
  return std::nullopt;
}

Visibility classify_visibility(const Box& target, const std::optional<Box>& occluder, int frame_width,
                               int frame_height) {
  if (target.cx() < 0.0 || target.cy() < 0.0 || target.cx() >= frame_width || target.cy() >= frame_height) {
    return Visibility::kAbsent;
  }
  const double area = target.area();
  if (occluder) {
    const double covered = intersection_area(target, *occluder) / area;
    if (covered >= kFullOcclusionFraction) return Visibility::kFullOcclusion;
    if (covered >= kPartialOcclusionFraction) return Visibility::kPartialOcclusion;
  }
  const Box frame{0.0, 0.0, static_cast<double>(frame_width), static_cast<double>(frame_height)};
  const double outside = 1.0 - intersection_area(target, frame) / area;
  if (outside >= kFrameCutFraction) return Visibility::kFrameCut;
  return Visibility::kClear;
}

void SyntheticSceneConfig::validate() const {
  if (length < 2) throw ConfigError("scene.length must be >= 2");
  if (!(target_min_size > 4.0) || !(target_max_size >= target_min_size)) {
    throw ConfigError("scene target sizes must satisfy 4 < min <= max");
  }
  if (frame_width < 4 * target_max_size || frame_height < 4 * target_max_size) {
    throw ConfigError("scene frame " + std::to_string(frame_width) + "x" + std::to_string(frame_height) +
                      " too small for targets up to " + format_double(target_max_size) + " px");
  }
  if (num_distractors < 0 || occlusion_events < 0 || exit_events < 0 || !(motion_noise >= 0.0)) {
    throw ConfigError("scene counts and motion noise must be non-negative");
  }
  const double footprint = 2.0 * target_max_size;
  if ((num_distractors + 1) * footprint * footprint > 0.5 * frame_width * frame_height) {
    throw ConfigError("scene: " + std::to_string(num_distractors) + " distractors do not fit a " +
                      std::to_string(frame_width) + "x" + std::to_string(frame_height) + " frame");
  }
}

bool same_content(const Sequence& a, const Sequence& b) {
  return a.frames == b.frames && a.annotations == b.annotations;
}

namespace {

using Rgb = std::array<double, 3>;

Rgb hsv_to_rgb(double hue, double sat, double val) {
  hue = std::fmod(std::fmod(hue, 360.0) + 360.0, 360.0);
  const double c = val * sat;
  const double x = c * (1.0 - std::abs(std::fmod(hue / 60.0, 2.0) - 1.0));
  const double m = val - c;
  Rgb rgb;
  switch (static_cast<int>(hue / 60.0)) {
    case 0: rgb = {c, x, 0}; break;
    case 1: rgb = {x, c, 0}; break;
    case 2: rgb = {0, c, x}; break;
    case 3: rgb = {0, x, c}; break;
    case 4: rgb = {x, 0, c}; break;
    default: rgb = {c, 0, x}; break;
  }
  for (auto& v : rgb) v = 255.0 * (v + m);
  return rgb;
}

enum class ShapeKind { kRectangle, kEllipse, kDiamond };

struct Appearance {
  ShapeKind shape = ShapeKind::kRectangle;
  Rgb body{};
  Rgb band{};
};

struct Mover {
  double cx = 0.0, cy = 0.0, vx = 0.0, vy = 0.0, w = 0.0, h = 0.0;
  Box box() const { return Box::from_center(cx, cy, w, h); }
};

std::uint8_t to_byte(double v) { return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L)); }

void draw_object(Image& img, const Box& box, const Appearance& look) {
  const int x0 = std::max(0, static_cast<int>(std::floor(box.x)));
  const int y0 = std::max(0, static_cast<int>(std::floor(box.y)));
  const int x1 = std::min(img.width() - 1, static_cast<int>(std::ceil(box.right())));
  const int y1 = std::min(img.height() - 1, static_cast<int>(std::ceil(box.bottom())));
  const double hw = 0.5 * box.w, hh = 0.5 * box.h;
  for (int y = y0; y <= y1; ++y) {
    const double dy = (y + 0.5 - box.cy()) / hh;
    for (int x = x0; x <= x1; ++x) {
      const double dx = (x + 0.5 - box.cx()) / hw;
      bool inside = std::abs(dx) <= 1.0 && std::abs(dy) <= 1.0;
      if (look.shape == ShapeKind::kEllipse) inside = dx * dx + dy * dy <= 1.0;
      if (look.shape == ShapeKind::kDiamond) inside = std::abs(dx) + std::abs(dy) <= 1.0;
      if (!inside) continue;
      const Rgb& c = std::abs(dy) <= 1.0 / 3.0 ? look.band : look.body;
      std::uint8_t* p = img.pixel(x, y);
      for (int k = 0; k < 3; ++k) p[k] = to_byte(c[k]);
    }
  }
}

void draw_occluder(Image& img, const Box& box) {
  const int x0 = std::max(0, static_cast<int>(std::floor(box.x)));
  const int y0 = std::max(0, static_cast<int>(std::floor(box.y)));
  const int x1 = std::min(img.width(), static_cast<int>(std::ceil(box.right())));
  const int y1 = std::min(img.height(), static_cast<int>(std::ceil(box.bottom())));
  for (int y = y0; y < y1; ++y) {
    for (int x = x0; x < x1; ++x) {
      // Pixel centre must be inside the rectangle.
      if (x + 0.5 < box.x || x + 0.5 > box.right() || y + 0.5 < box.y || y + 0.5 > box.bottom()) continue;
      const bool hatch = ((x - x0) + (y - y0)) % 12 < 3;
      const std::uint8_t v = hatch ? 96 : 64;
      std::uint8_t* p = img.pixel(x, y);
      p[0] = v;
      p[1] = v;
      p[2] = static_cast<std::uint8_t>(v + 4);
    }
  }
}

Appearance random_target_look(Rng& rng) {
  Appearance look;
  look.shape = static_cast<ShapeKind>(rng.below(3));
  const double hue = rng.uniform(0.0, 360.0);
  const double sat = rng.uniform(0.65, 1.0);
  const double val = rng.uniform(0.7, 1.0);
  look.body = hsv_to_rgb(hue, sat, val);
  look.band = hsv_to_rgb(hue + rng.uniform(120.0, 240.0), rng.uniform(0.5, 1.0), rng.uniform(0.35, 0.9));
  return look;
}

Appearance distractor_look(const Appearance& target, Rng& rng) {
  Appearance look = target;
  // Same shape family, colours shifted enough to stay distinguishable.
  const double shift = (rng.bernoulli(0.5) ? 1.0 : -1.0) * rng.uniform(40.0, 80.0);
  for (Rgb* c : {&look.body, &look.band}) {
    const double r = (*c)[0] / 255.0, g = (*c)[1] / 255.0, b = (*c)[2] / 255.0;
    const double mx = std::max({r, g, b}), mn = std::min({r, g, b});
    double h = 0.0;
    if (mx > mn) {
      if (mx == r) h = 60.0 * std::fmod((g - b) / (mx - mn), 6.0);
      else if (mx == g) h = 60.0 * ((b - r) / (mx - mn) + 2.0);
      else h = 60.0 * ((r - g) / (mx - mn) + 4.0);
    }
    const double s = mx > 0.0 ? (mx - mn) / mx : 0.0;
    *c = hsv_to_rgb(h + shift, s, mx);
  }
  return look;
}

enum class Mode { kFree, kOcclusion, kExitOut, kExitHold, kExitReturn };
enum class Event { kOcclusion, kExit };

}  // namespace

Sequence generate_sequence(const SyntheticSceneConfig& cfg) {
  cfg.validate();
  Rng rng(cfg.seed);
  const int W = cfg.frame_width, H = cfg.frame_height;

  Sequence seq;
  seq.id = "synthetic-" + std::to_string(cfg.seed);
  seq.seed = cfg.seed;

  // Static background: tinted grey with a low-frequency texture.
  const double base = rng.uniform(95.0, 150.0);
  const Rgb tint{rng.uniform(-12.0, 12.0), rng.uniform(-12.0, 12.0), rng.uniform(-12.0, 12.0)};
  const double fx = rng.uniform(0.015, 0.05), fy = rng.uniform(0.015, 0.05);
  const double phx = rng.uniform(0.0, 6.28), phy = rng.uniform(0.0, 6.28);
  const double amp = rng.uniform(8.0, 18.0);
  std::vector<double> background(static_cast<std::size_t>(W) * H * 3);
  for (int y = 0; y < H; ++y)
    for (int x = 0; x < W; ++x) {
      const double t = amp * std::sin(fx * x + phx) * std::sin(fy * y + phy);
      for (int k = 0; k < 3; ++k) background[(static_cast<std::size_t>(y) * W + x) * 3 + k] = base + tint[k] + t;
    }

  const Appearance target_look = random_target_look(rng);
  Mover target;
  target.w = rng.uniform(cfg.target_min_size, cfg.target_max_size);
  target.h = rng.uniform(cfg.target_min_size, cfg.target_max_size);
  const double margin = std::max(target.w, target.h);
  target.cx = rng.uniform(W * 0.35, W * 0.65);
  target.cy = rng.uniform(H * 0.35, H * 0.65);

  std::vector<Mover> distractors;
  std::vector<Appearance> distractor_looks;
  for (int i = 0; i < cfg.num_distractors; ++i) {
    Mover d;
    d.w = target.w * rng.uniform(0.85, 1.15);
    d.h = target.h * rng.uniform(0.85, 1.15);
    // Start away from the target so the first frame is unambiguous.
    for (int attempt = 0; attempt < 100; ++attempt) {
      d.cx = rng.uniform(margin, W - margin);
      d.cy = rng.uniform(margin, H - margin);
      if (std::hypot(d.cx - target.cx, d.cy - target.cy) > 2.5 * margin) break;
    }
    distractors.push_back(d);
    distractor_looks.push_back(distractor_look(target_look, rng));
  }

  std::vector<Event> events;
  if (cfg.occluder_enabled) events.insert(events.end(), cfg.occlusion_events, Event::kOcclusion);
  events.insert(events.end(), cfg.exit_events, Event::kExit);
  for (std::size_t i = events.size(); i > 1; --i) std::swap(events[i - 1], events[rng.below(i)]);

  const double lo_x = margin, hi_x = W - margin, lo_y = margin, hi_y = H - margin;
  Mode mode = Mode::kFree;
  int next_event = 8 + static_cast<int>(rng.below(6));
  std::size_t event_index = 0;
  double occ_progress = 0.0, occ_w = 0.0, occ_h = 0.0;
  const double occ_speed = 5.0, exit_speed = 6.0;
  double exit_dx = 0.0, exit_dy = 0.0;
  int hold_left = 0;
  const std::uint64_t noise_seed = rng.next_u64();

  auto random_walk = [&](Mover& m, double damping) {
    m.vx = damping * (0.92 * m.vx + cfg.motion_noise * rng.normal());
    m.vy = damping * (0.92 * m.vy + cfg.motion_noise * rng.normal());
    const double speed = std::hypot(m.vx, m.vy);
    if (speed > 3.0) {
      m.vx *= 3.0 / speed;
      m.vy *= 3.0 / speed;
    }
    m.cx += m.vx;
    m.cy += m.vy;
    if (m.cx < lo_x) { m.cx = 2 * lo_x - m.cx; m.vx = std::abs(m.vx); }
    if (m.cx > hi_x) { m.cx = 2 * hi_x - m.cx; m.vx = -std::abs(m.vx); }
    if (m.cy < lo_y) { m.cy = 2 * lo_y - m.cy; m.vy = std::abs(m.vy); }
    if (m.cy > hi_y) { m.cy = 2 * hi_y - m.cy; m.vy = -std::abs(m.vy); }
  };

  for (int t = 0; t < cfg.length; ++t) {
    std::optional<Box> occluder;
    if (t > 0) {
      if (mode == Mode::kFree && t >= next_event && event_index < events.size()) {
        if (events[event_index] == Event::kOcclusion) {
          mode = Mode::kOcclusion;
          occ_w = 1.35 * target.w + 8.0;
          occ_h = 1.3 * target.h + 6.0;
          occ_progress = 0.0;
        } else {
          mode = Mode::kExitOut;
          // Leave through the nearest edge.
          const double d[4] = {target.cx, W - target.cx, target.cy, H - target.cy};
          const int side = static_cast<int>(std::min_element(d, d + 4) - d);
          exit_dx = side == 0 ? -1.0 : side == 1 ? 1.0 : 0.0;
          exit_dy = side == 2 ? -1.0 : side == 3 ? 1.0 : 0.0;
          hold_left = 4 + static_cast<int>(rng.below(5));
        }
        ++event_index;
      }
      switch (mode) {
        case Mode::kFree: random_walk(target, 1.0); break;
        case Mode::kOcclusion: random_walk(target, 0.3); break;
        case Mode::kExitOut:
          target.cx += exit_speed * exit_dx;
          target.cy += exit_speed * exit_dy;
          if (target.cx < -0.25 * target.w || target.cx > W + 0.25 * target.w || target.cy < -0.25 * target.h ||
              target.cy > H + 0.25 * target.h) {
            mode = Mode::kExitHold;
          }
          break;
        case Mode::kExitHold:
          if (--hold_left <= 0) mode = Mode::kExitReturn;
          break;
        case Mode::kExitReturn:
          target.cx -= exit_speed * exit_dx;
          target.cy -= exit_speed * exit_dy;
          if (target.cx >= lo_x && target.cx <= hi_x && target.cy >= lo_y && target.cy <= hi_y) {
            mode = Mode::kFree;
            target.vx = target.vy = 0.0;
            next_event = t + 8 + static_cast<int>(rng.below(9));
          }
          break;
      }
      if (mode == Mode::kOcclusion) {
        occ_progress += occ_speed;
        const Box tb = target.box();
        const double ox = tb.x - occ_w - 4.0 + occ_progress;
        if (ox > tb.right() + 4.0) {
          mode = Mode::kFree;
          next_event = t + 8 + static_cast<int>(rng.below(9));
        } else {
          occluder = Box{ox, tb.cy() - 0.5 * occ_h, occ_w, occ_h};
        }
      }
      for (auto& d : distractors) random_walk(d, 1.0);
    }

    Image img(W, H);
    for (int y = 0; y < H; ++y)
      for (int x = 0; x < W; ++x) {
        const std::size_t i = (static_cast<std::size_t>(y) * W + x) * 3;
        const std::uint64_t n = derive_seed(noise_seed, (static_cast<std::uint64_t>(t) << 32) | (y * W + x));
        for (int k = 0; k < 3; ++k) {
          const double noise = static_cast<double>((n >> (8 * k)) & 0xFF) / 255.0 * 10.0 - 5.0;
          img.bytes()[i + k] = to_byte(background[i + k] + noise);
        }
      }
    for (std::size_t i = 0; i < distractors.size(); ++i) draw_object(img, distractors[i].box(), distractor_looks[i]);
    const Box tb = target.box();
    draw_object(img, tb, target_look);
    if (occluder) draw_occluder(img, *occluder);

    FrameAnnotation ann;
    ann.visibility = classify_visibility(tb, occluder, W, H);
    if (ann.visibility != Visibility::kAbsent) {
      const double x0 = std::max(0.0, tb.x), y0 = std::max(0.0, tb.y);
      const double x1 = std::min<double>(W, tb.right()), y1 = std::min<double>(H, tb.bottom());
      ann.box = Box{x0, y0, x1 - x0, y1 - y0};
    }
    seq.frames.push_back(std::move(img));
    seq.annotations.push_back(ann);
    seq.truth.target.push_back(tb);
    seq.truth.occluder.push_back(occluder);
  }
  return seq;
}

Box CropTransform::to_crop(const Box& b) const {
  return Box{(b.x - origin_x) * scale, (b.y - origin_y) * scale, b.w * scale, b.h * scale};
}

Box CropTransform::to_frame(const Box& b) const {
  return Box{b.x / scale + origin_x, b.y / scale + origin_y, b.w / scale, b.h / scale};
}

CropTransform crop_transform(const Box& box, double context_factor, int out_size) {
  if (!box.valid()) {
    throw DegenerateInputError("crop: degenerate box (" + format_double(box.w) + "x" + format_double(box.h) + ")");
  }
  if (!(context_factor > 0.0) || out_size <= 0) throw ConfigError("crop: context factor and size must be positive");
  const double side = context_factor * std::sqrt(box.w * box.h);
  CropTransform t;
  t.scale = out_size / side;
  t.origin_x = box.cx() - 0.5 * side;
  t.origin_y = box.cy() - 0.5 * side;
  return t;
}

Tensor<float> crop_patch(const Image& frame, const CropTransform& transform, int out_size) {
  const int W = frame.width(), H = frame.height();
  Tensor<float> out({3, out_size, out_size});
  float* dst = out.data().data();
  const std::size_t plane = static_cast<std::size_t>(out_size) * out_size;
  const double inv = 1.0 / transform.scale;
  std::vector<int> xs(out_size);
  std::vector<double> ax(out_size);
  for (int u = 0; u < out_size; ++u) {
    const double sx = transform.origin_x + (u + 0.5) * inv - 0.5;
    xs[u] = static_cast<int>(std::floor(sx));
    ax[u] = sx - xs[u];
  }
  auto sample = [&](int x, int y, int k) -> double {
    if (x < 0 || y < 0 || x >= W || y >= H) return 0.0;
    return frame.pixel(x, y)[k];
  };
  for (int v = 0; v < out_size; ++v) {
    const double sy = transform.origin_y + (v + 0.5) * inv - 0.5;
    const int y0 = static_cast<int>(std::floor(sy));
    const double ay = sy - y0;
    for (int u = 0; u < out_size; ++u) {
      const int x0 = xs[u];
      const double a = ax[u];
      for (int k = 0; k < 3; ++k) {
        double val;
        if (a == 0.0 && ay == 0.0) {
          val = sample(x0, y0, k);
        } else {
          val = (1 - ay) * ((1 - a) * sample(x0, y0, k) + a * sample(x0 + 1, y0, k)) +
                ay * ((1 - a) * sample(x0, y0 + 1, k) + a * sample(x0 + 1, y0 + 1, k));
        }
        dst[k * plane + static_cast<std::size_t>(v) * out_size + u] = static_cast<float>(val / 255.0);
      }
    }
  }
  return out;
}

Tensor<float> crop_patch(const Image& frame, const Box& box, double context_factor, int out_size) {
  return crop_patch(frame, crop_transform(box, context_factor, out_size), out_size);
}

void flip_horizontal(Tensor<float>& patch, Box& box) {
  const int C = patch.dim(0), H = patch.dim(1), W = patch.dim(2);
  auto d = patch.data();
  for (int c = 0; c < C; ++c)
    for (int y = 0; y < H; ++y) {
      float* row = d.data() + (static_cast<std::size_t>(c) * H + y) * W;
      std::reverse(row, row + W);
    }
  box.x = W - box.x - box.w;
}

void apply_brightness(Tensor<float>& patch, double factor) {
  if (factor == 1.0) return;
  for (float& v : patch.data()) v = std::clamp(static_cast<float>(v * factor), 0.0f, 1.0f);
}

Augmented augment(const Tensor<float>& patch, const Box& box, std::uint64_t seed) {
  Rng rng(seed);
  Augmented out{patch.clone(), box, false, 1.0};
  out.flipped = rng.bernoulli(0.5);
  out.brightness = rng.uniform(0.6, 1.4);
  if (out.flipped) flip_horizontal(out.patch, out.box);
  apply_brightness(out.patch, out.brightness);
  return out;
}

std::string format_double(double value) {
  if (std::isnan(value)) return "NaN";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, ptr);
}

std::string format_annotation_line(const FrameAnnotation& a) {
  if (!a.box) return std::string("NaN,NaN,NaN,NaN,") + to_string(a.visibility);
  return format_double(a.box->x) + "," + format_double(a.box->y) + "," + format_double(a.box->w) + "," +
         format_double(a.box->h) + "," + to_string(a.visibility);
}

namespace {

double parse_number(std::string_view token, int line_number) {
  if (token == "NaN" || token == "nan") return std::nan("");
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
  if (ec != std::errc() || ptr != token.data() + token.size()) {
    throw ParseError("line " + std::to_string(line_number) + ": bad number '" + std::string(token) + "'");
  }
  return v;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = s.find(sep, start);
    out.push_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

}  // namespace

FrameAnnotation parse_annotation_line(std::string_view line, int line_number) {
  while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.remove_suffix(1);
  const auto fields = split(line, ',');
  if (fields.size() != 5) {
    throw ParseError("line " + std::to_string(line_number) + ": expected 5 fields, got " +
                     std::to_string(fields.size()));
  }
  const auto vis = parse_visibility(fields[4]);
  if (!vis) {
    throw ParseError("line " + std::to_string(line_number) + ": unknown visibility token '" +
                     std::string(fields[4]) + "'");
  }
  FrameAnnotation a;
  a.visibility = *vis;
  Box b{parse_number(fields[0], line_number), parse_number(fields[1], line_number),
        parse_number(fields[2], line_number), parse_number(fields[3], line_number)};
  if (*vis == Visibility::kAbsent) {
    if (b.finite()) throw ParseError("line " + std::to_string(line_number) + ": AB frame must have NaN box");
    return a;
  }
  if (!b.valid()) throw ParseError("line " + std::to_string(line_number) + ": box must have positive size");
  a.box = b;
  return a;
}

void save_sequence(const Sequence& seq, const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir / "frames");
  for (int i = 0; i < seq.length(); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "frame_%06d.ppm", i);
    write_ppm(seq.frames[i], dir / "frames" / name);
  }
  std::ofstream gt(dir / "groundtruth.txt");
  for (const auto& a : seq.annotations) gt << format_annotation_line(a) << '\n';
  std::ofstream meta(dir / "meta.txt");
  meta << "id=" << seq.id << '\n'
       << "seed=" << seq.seed << '\n'
       << "length=" << seq.length() << '\n'
       << "frame_width=" << seq.frame_width() << '\n'
       << "frame_height=" << seq.frame_height() << '\n';
  if (!gt || !meta) throw IoError("failed writing sequence to " + dir.string());
}

Sequence load_sequence(const std::filesystem::path& dir) {
  std::ifstream meta(dir / "meta.txt");
  if (!meta) throw IoError("missing " + (dir / "meta.txt").string());
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(meta, line)) {
    const auto eq = line.find('=');
    if (eq != std::string::npos) kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  Sequence seq;
  seq.id = kv.count("id") ? kv["id"] : dir.filename().string();
  try {
    seq.seed = kv.count("seed") ? std::stoull(kv["seed"]) : 0;
  } catch (const std::exception&) {
    throw ParseError(dir.string() + "/meta.txt: bad seed");
  }

  std::ifstream gt(dir / "groundtruth.txt");
  if (!gt) throw IoError("missing " + (dir / "groundtruth.txt").string());
  int number = 0;
  while (std::getline(gt, line)) {
    ++number;
    if (line.empty()) continue;
    seq.annotations.push_back(parse_annotation_line(line, number));
  }
  for (std::size_t i = 0; i < seq.annotations.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "frame_%06zu.ppm", i);
    seq.frames.push_back(read_ppm(dir / "frames" / name));
  }
  if (kv.count("length") && std::to_string(seq.frames.size()) != kv["length"]) {
    throw ParseError(dir.string() + ": meta length " + kv["length"] + " disagrees with " +
                     std::to_string(seq.frames.size()) + " annotated frames");
  }
  return seq;
}

std::vector<Sequence> generate_dataset(const SyntheticSceneConfig& base, int count, std::uint64_t seed) {
  if (count <= 0) throw ConfigError("dataset needs at least one sequence");
  std::vector<Sequence> out;
  for (int i = 0; i < count; ++i) {
    SyntheticSceneConfig cfg = base;
    cfg.seed = derive_seed(seed, static_cast<std::uint64_t>(i));
    Sequence s = generate_sequence(cfg);
    char id[32];
    std::snprintf(id, sizeof id, "seq_%04d", i);
    s.id = id;
    out.push_back(std::move(s));
  }
  return out;
}

void save_dataset(std::span<const Sequence> sequences, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::ofstream manifest(dir / "manifest.txt");
  for (const auto& s : sequences) {
    save_sequence(s, dir / s.id);
    manifest << s.id << ' ' << s.seed << '\n';
  }
  if (!manifest) throw IoError("failed writing " + (dir / "manifest.txt").string());
}

std::vector<Sequence> load_dataset(const std::filesystem::path& dir) {
  std::ifstream manifest(dir / "manifest.txt");
  if (!manifest) throw IoError("missing " + (dir / "manifest.txt").string());
  std::vector<Sequence> out;
  std::string line;
  while (std::getline(manifest, line)) {
    std::istringstream ls(line);
    std::string id;
    if (!(ls >> id)) continue;
    out.push_back(load_sequence(dir / id));
  }
  if (out.empty()) throw ParseError((dir / "manifest.txt").string() + " lists no sequences");
  return out;
}

}  // namespace cftrack
