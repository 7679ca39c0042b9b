#include <cmath>

#include "cftrack/error.hpp"
#include "cftrack/fusion.hpp"
#include "cftrack/model.hpp"
#include "support.hpp"

using namespace cftrack;
using testing::random_tensor;

namespace {

std::size_t closed_form_count(const BackboneConfig& c) {
  const std::size_t k0 = c.kernels[0];
  std::size_t n = c.widths[0] * c.input_channels * k0 * k0 + c.widths[0];
  for (std::size_t s = 1; s < c.widths.size(); ++s) {
    const std::size_t in = c.widths[s - 1], out = c.widths[s], k = c.kernels[s];
    n += in * k * k + in + out * in + out;
  }
  return n;
}

template <typename T>
FeatureMap<T> map_of(Role role, Tensor<T> t) {
  return FeatureMap<T>{role, std::move(t)};
}

}  // namespace

TEST_SUITE("backbone") {

TEST_CASE("build is deterministic per seed") {
  const BackboneConfig config;
  auto a = build_backbone<float>(config, 7);
  auto b = build_backbone<float>(config, 7);
  auto c = build_backbone<float>(config, 8);
  REQUIRE(a.params.size() == b.params.size());
  bool differs = false;
  for (std::size_t i = 0; i < a.params.size(); ++i) {
    const auto& ta = a.params.entries()[i].tensor;
    const auto& tb = b.params.entries()[i].tensor;
    CHECK(std::equal(ta.data().begin(), ta.data().end(), tb.data().begin()));
    const auto& tc = c.params.entries()[i].tensor;
    differs |= !std::equal(ta.data().begin(), ta.data().end(), tc.data().begin());
  }
  CHECK(differs);
}

TEST_CASE("parameter count has a closed form") {
  const BackboneConfig config;
  auto built = build_backbone<float>(config, 1);
  CHECK(built.params.scalar_count() == closed_form_count(config));
  CHECK(built.params.scalar_count() == 448 + 568 + 1040 + 2432);
}

TEST_CASE("config validation") {
  BackboneConfig config;
  CHECK_NOTHROW(config.validate());
  CHECK(config.total_stride() == 16);
  CHECK(config.template_feature_size() == 9);
  CHECK(config.search_feature_size() == 17);

  config.strides = {2, 2, 2, 1};
  CHECK_THROWS_AS(config.validate(), ConfigError);
  CHECK_THROWS_AS(build_backbone<float>(config, 1), ConfigError);

  BackboneConfig ragged;
  ragged.kernels = {3, 3, 3};
  CHECK_THROWS_AS(ragged.validate(), ConfigError);
}

TEST_CASE("feature shapes per role") {
  auto built = build_backbone<float>(BackboneConfig{}, 3);
  const auto z = built.backbone.extract_features(random_tensor<float>({3, 144, 144}, 1, 0.0, 1.0), Role::kTemplate);
  CHECK(z.role == Role::kTemplate);
  CHECK(z.data.shape() == Shape{64, 9, 9});
  const auto x = built.backbone.extract_features(random_tensor<float>({3, 272, 272}, 2, 0.0, 1.0), Role::kSearch);
  CHECK(x.role == Role::kSearch);
  CHECK(x.data.shape() == Shape{64, 17, 17});

  CHECK_THROWS_AS(built.backbone.extract_features(Tensor<float>({3, 272, 272}), Role::kTemplate), ShapeError);
  CHECK_THROWS_AS(built.backbone.extract_features(Tensor<float>({3, 144, 144}), Role::kSearch), ShapeError);
  CHECK_THROWS_AS(built.backbone.extract_features(Tensor<float>({1, 144, 144}), Role::kTemplate), ShapeError);
}

TEST_CASE("zero input gives finite output") {
  auto built = build_backbone<float>(BackboneConfig{}, 4);
  const auto z = built.backbone.extract_features(Tensor<float>({3, 144, 144}, 0.0f), Role::kTemplate);
  CHECK(z.data.all_finite());
}

TEST_CASE("features are deterministic") {
  auto a = build_backbone<float>(BackboneConfig{}, 5);
  auto b = build_backbone<float>(BackboneConfig{}, 5);
  const auto img = random_tensor<float>({3, 144, 144}, 9, 0.0, 1.0);
  const auto fa = a.backbone.extract_features(img, Role::kTemplate);
  const auto fb = b.backbone.extract_features(img, Role::kTemplate);
  CHECK(std::equal(fa.data.data().begin(), fa.data.data().end(), fb.data.data().begin()));
}

TEST_CASE("both branches share one parameter set") {
  auto model = TrackerModel<float>::build(ModelConfig{}, 2);
  // The backbone's layers are views of the registered tensors, not copies.
  const auto& registered = model.params().get("backbone.stem.weight");
  CHECK(model.backbone().stem().weight.data().data() == registered.data().data());
  for (const auto& e : model.params().entries()) {
    CHECK(e.name.find("template") == std::string::npos);
    CHECK(e.name.find("search") == std::string::npos);
  }
  // Same patch through the raw stack and both role paths.
  const auto img = random_tensor<float>({3, 144, 144}, 10, 0.0, 1.0);
  const auto direct = model.backbone().forward(img);
  const auto z = model.template_features(img);
  CHECK(std::equal(direct.data().begin(), direct.data().end(), z.data.data().begin()));
}

TEST_CASE("role names") {
  CHECK(std::string(to_string(Role::kTemplate)) == "template");
  CHECK(std::string(to_string(Role::kSearch)) == "search");
}

}  // TEST_SUITE

TEST_SUITE("fusion") {

TEST_CASE("correlation examples") {
  SUBCASE("zero template") {
    const auto out = pixelwise_correlation(map_of(Role::kTemplate, Tensor<float>({4, 9, 9}, 0.0f)),
                                           map_of(Role::kSearch, random_tensor<float>({4, 17, 17}, 1)));
    CHECK(out.shape() == Shape{81, 17, 17});
    for (float v : out.data()) CHECK(v == 0.0f);
  }
  SUBCASE("single channel hand value") {
    Tensor<float> z({1, 9, 9}, 0.0f);
    z[0] = 2.0f;
    const auto out = pixelwise_correlation(map_of(Role::kTemplate, z),
                                           map_of(Role::kSearch, Tensor<float>({1, 17, 17}, 3.0f)));
    for (int k = 0; k < 81; ++k) {
      for (int p = 0; p < 289; ++p) CHECK(out[k * 289 + p] == (k == 0 ? 6.0f : 0.0f));
    }
  }
  SUBCASE("explicit sum") {
    const auto z = random_tensor<double>({3, 9, 9}, 2);
    const auto x = random_tensor<double>({3, 17, 17}, 3);
    const auto out = pixelwise_correlation(map_of(Role::kTemplate, z), map_of(Role::kSearch, x));
    double worst = 0.0;
    for (int k = 0; k < 81; ++k) {
      for (int p = 0; p < 289; ++p) {
        double acc = 0.0;
        for (int c = 0; c < 3; ++c) acc += z[c * 81 + k] * x[c * 289 + p];
        worst = std::max(worst, std::abs(acc - out[k * 289 + p]));
      }
    }
    CHECK(worst < 1e-12);
  }
  SUBCASE("channel mismatch") {
    CHECK_THROWS_AS(pixelwise_correlation(map_of(Role::kTemplate, Tensor<float>({4, 9, 9})),
                                          map_of(Role::kSearch, Tensor<float>({5, 17, 17}))),
                    ShapeError);
  }
}

TEST_CASE("correlation is bilinear") {
  const auto z1 = random_tensor<float>({8, 9, 9}, 11);
  const auto z2 = random_tensor<float>({8, 9, 9}, 12);
  const auto x1 = random_tensor<float>({8, 17, 17}, 13);
  const auto x2 = random_tensor<float>({8, 17, 17}, 14);
  auto corr = [](const Tensor<float>& z, const Tensor<float>& x) {
    return pixelwise_correlation(map_of(Role::kTemplate, z), map_of(Role::kSearch, x));
  };
  const float alpha = 1.75f;
  const auto base = corr(z1, x1);
  const auto scaled = corr(ops::scale(z1, alpha), x1);
  const auto add_z = corr(ops::add(z1, z2), x1);
  const auto z2x1 = corr(z2, x1);
  const auto add_x = corr(z1, ops::add(x1, x2));
  const auto z1x2 = corr(z1, x2);
  for (std::size_t i = 0; i < base.numel(); ++i) {
    CHECK(std::abs(scaled[i] - alpha * base[i]) <= 1e-5f);
    CHECK(std::abs(add_z[i] - (base[i] + z2x1[i])) <= 1e-5f);
    CHECK(std::abs(add_x[i] - (base[i] + z1x2[i])) <= 1e-5f);
  }
}

TEST_CASE("attention with zero weights halves the map") {
  ParameterSet<float> params;
  Rng rng(1);
  auto mlp = AttentionMLP<float>::build(params, 81, 20, rng);
  for (auto& e : params.entries()) std::fill(e.tensor.data().begin(), e.tensor.data().end(), 0.0f);
  const auto fused = random_tensor<float>({81, 17, 17}, 5);
  const auto out = channel_attention(fused, mlp);
  for (std::size_t i = 0; i < fused.numel(); ++i) CHECK(out.data[i] == 0.5f * fused[i]);
}

TEST_CASE("attention gates shrink and keep sign") {
  ParameterSet<float> params;
  Rng rng(2);
  auto mlp = AttentionMLP<float>::build(params, 81, 20, rng);
  CHECK(params.get("fusion.fc2.bias").data()[0] == 0.0f);
  const auto fused = random_tensor<float>({81, 17, 17}, 6, -3.0, 3.0);
  const auto gates = mlp.gates(ops::global_avg_pool(fused));
  CHECK(gates.shape() == Shape{81});
  for (float g : gates.data()) {
    CHECK(g > 0.0f);
    CHECK(g < 1.0f);
  }
  const auto out = channel_attention(fused, mlp);
  for (std::size_t i = 0; i < fused.numel(); ++i) {
    if (fused[i] == 0.0f) continue;
    CHECK(std::abs(out.data[i]) < std::abs(fused[i]));
    CHECK((out.data[i] > 0) == (fused[i] > 0));
  }
}

TEST_CASE("attention gradient w.r.t. first layer") {
  ParameterSet<double> params;
  Rng rng(3);
  auto mlp = AttentionMLP<double>::build(params, 81, 20, rng);
  const auto fused = random_tensor<double>({81, 17, 17}, 7);
  auto loss = [&] { return ops::mean(channel_attention(fused, mlp).data); };
  ParameterSet<double> only_w1;
  only_w1.add("fc1.weight", mlp.fc1.weight);
  GradCheckOptions<double> o;
  o.h = 1e-5;
  o.samples_per_tensor = 200;
  o.scale_floor = 1e-6;
  const auto report = finite_diff_check<double>(loss, only_w1, o);
  CHECK(report.skipped <= 20);
  CHECK(report.max_relative_error < 1e-3);
}

TEST_CASE("model fusion shape is enforced") {
  auto model = TrackerModel<float>::build(ModelConfig{}, 4);
  const auto z = model.template_features(random_tensor<float>({3, 144, 144}, 1, 0.0, 1.0));
  const auto x = model.search_features(random_tensor<float>({3, 272, 272}, 2, 0.0, 1.0));
  const auto fused = model.fuse(z, x);
  CHECK(fused.data.shape() == Shape{81, 17, 17});
  CHECK(model.config().fused_channels() == 81);
  // Two template-sized maps correlate to the wrong spatial size.
  CHECK_THROWS_AS(model.fuse(z, FeatureMap<float>{Role::kSearch, z.data}), ShapeError);
}

}  // TEST_SUITE
