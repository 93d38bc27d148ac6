#include "doctest.h"

#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "ganbench/errors.hpp"
#include "ganbench/io.hpp"
#include "ganbench/scenegen.hpp"

using namespace ganbench;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("ganbench_test_" + std::to_string(std::rand()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string stem(const std::string& name) const { return (path / name).string(); }
};

}  // namespace

TEST_CASE("fnv1a matches the reference value") {
  // standard FNV-1a 64 test vector
  CHECK(io::hash_string("") == 0xcbf29ce484222325ULL);
  CHECK(io::hash_string("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(io::hex64(0xcbf29ce484222325ULL) == "cbf29ce484222325");
}

TEST_CASE("point dataset round trip") {
  TempDir tmp;
  auto ds = pointgen::gen_blobs(100, pointgen::BlobSpec{}, 42);
  io::save_point_dataset(ds, tmp.stem("pts"));
  auto back = io::load_point_dataset(tmp.stem("pts"));
  CHECK(back.kind == ds.kind);
  CHECK(back.n() == 100);
  CHECK(back.labels == ds.labels);
  CHECK(back.seed == 42);
  for (int64_t i = 0; i < ds.points.size(); ++i)
    CHECK(static_cast<float>(back.points[i]) == static_cast<float>(ds.points[i]));
  // identical generation produces an identical file
  io::save_point_dataset(ds, tmp.stem("pts2"));
  CHECK(io::hash_file(tmp.stem("pts") + ".f32") == io::hash_file(tmp.stem("pts2") + ".f32"));
}

TEST_CASE("normalization transform is preserved in the sidecar") {
  TempDir tmp;
  auto ds = pointgen::gen_circles(50, 0.5, 0.05, 1);
  auto norm = pointgen::normalize_points(ds);
  io::save_point_dataset(norm.ds, tmp.stem("n"), &norm.transform);
  pointgen::AffineTransform t;
  auto back = io::load_point_dataset(tmp.stem("n"), &t);
  CHECK(!t.identity);
  REQUIRE(t.scale.size() == 2);
  CHECK(t.scale[0] == norm.transform.scale[0]);
  CHECK(t.offset[1] == norm.transform.offset[1]);
}

TEST_CASE("image dataset round trip is bit-exact with annotations") {
  TempDir tmp;
  auto ds = scenegen::gen_image_dataset(scenegen::DatasetName::ct2, 6, 9);
  io::save_image_dataset(ds, tmp.stem("img"));
  auto back = io::load_image_dataset(tmp.stem("img"));
  CHECK(back.name == ds.name);
  CHECK(back.n() == 6);
  CHECK(back.images.shape() == ds.images.shape());
  CHECK(std::memcmp(back.images.data(), ds.images.data(),
                    sizeof(float) * static_cast<size_t>(ds.images.size())) == 0);
  REQUIRE(back.annotations.size() == ds.annotations.size());
  for (size_t i = 0; i < ds.annotations.size(); ++i) {
    REQUIRE(back.annotations[i].shapes.size() == ds.annotations[i].shapes.size());
    for (size_t s = 0; s < ds.annotations[i].shapes.size(); ++s) {
      CHECK(back.annotations[i].shapes[s].kind == ds.annotations[i].shapes[s].kind);
      CHECK(back.annotations[i].shapes[s].x == ds.annotations[i].shapes[s].x);
      CHECK(back.annotations[i].shapes[s].size == ds.annotations[i].shapes[s].size);
      CHECK(back.annotations[i].shapes[s].color == ds.annotations[i].shapes[s].color);
    }
  }
}

TEST_CASE("checkpoint round trip: forward is bit-identical after load") {
  TempDir tmp;
  gancore::ModelSpec spec;
  spec.family = gancore::Family::mlp_wgan_gp;
  auto model = gancore::build_model<float>(spec, 7);

  core::Rng rng(3);
  core::Tensor<float> z({16, 2});
  for (int64_t i = 0; i < z.size(); ++i) z[i] = static_cast<float>(rng.normal());
  nn::Ctx<float> ctx;
  auto before = model.generator.forward(autodiff::constant(z.clone()), ctx)->value.clone();

  io::CheckpointMeta meta;
  meta.step = 123;
  io::save_checkpoint(tmp.stem("m.gbcp"), model, nullptr, nullptr, meta);
  auto ck = io::load_checkpoint(tmp.stem("m.gbcp"));
  CHECK(ck.meta.step == 123);
  CHECK(ck.spec.family == spec.family);

  auto fresh = gancore::build_model<float>(spec, 999);  // different init
  io::apply_checkpoint(ck, fresh);
  auto after = fresh.generator.forward(autodiff::constant(z.clone()), ctx)->value.clone();
  REQUIRE(after.size() == before.size());
  CHECK(std::memcmp(after.data(), before.data(),
                    sizeof(float) * static_cast<size_t>(after.size())) == 0);
  CHECK(io::model_weights_hash(fresh) == io::model_weights_hash(model));
}

TEST_CASE("checkpoint with optimizer state round-trips") {
  TempDir tmp;
  gancore::ModelSpec spec;
  spec.family = gancore::Family::mlp_gan;
  auto model = gancore::build_model<float>(spec, 1);
  nn::Adam<float> gopt(2e-4f), copt(2e-4f);
  // produce some optimizer state
  auto params = model.generator.named_params();
  auto loss = autodiff::mean_all(
      autodiff::mul(params[0].var, params[0].var));
  auto grads = autodiff::backward(loss, {params[0].var});
  gopt.step(params, grads);

  io::save_checkpoint(tmp.stem("o.gbcp"), model, &gopt, &copt, {});
  auto ck = io::load_checkpoint(tmp.stem("o.gbcp"));
  auto fresh = gancore::build_model<float>(spec, 2);
  nn::Adam<float> g2(2e-4f), c2(2e-4f);
  io::apply_checkpoint(ck, fresh, &g2, &c2);
  auto s1 = gopt.state();
  auto s2 = g2.state();
  REQUIRE(s1.size() == s2.size());
}

TEST_CASE("checkpoint corruption and incompatibility raise typed errors") {
  TempDir tmp;
  {
    std::ofstream f(tmp.stem("bad.gbcp"), std::ios::binary);
    f << "NOPEnope";
  }
  CHECK_THROWS_AS(io::load_checkpoint(tmp.stem("bad.gbcp")), IncompatibleCheckpointError);

  gancore::ModelSpec pts;
  pts.family = gancore::Family::mlp_gan;
  auto model = gancore::build_model<float>(pts, 1);
  io::save_checkpoint(tmp.stem("p.gbcp"), model, nullptr, nullptr, {});
  auto ck = io::load_checkpoint(tmp.stem("p.gbcp"));
  gancore::ModelSpec other = pts;
  other.hidden = {64, 64, 64};
  auto wrong = gancore::build_model<float>(other, 1);
  CHECK_THROWS_AS(io::apply_checkpoint(ck, wrong), IncompatibleCheckpointError);
}

TEST_CASE("png writer emits a valid signature") {
  TempDir tmp;
  auto img = scenegen::render_scene([] {
    scenegen::SceneAnnotation ann;
    ann.shapes.push_back({scenegen::ShapeKind::square, 10, 10, 4, {1, 1, 1}});
    return ann;
  }());
  io::write_image_png(tmp.stem("x.png"), img);
  std::ifstream f(tmp.stem("x.png"), std::ios::binary);
  unsigned char sig[8];
  f.read(reinterpret_cast<char*>(sig), 8);
  const unsigned char expected[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  CHECK(std::memcmp(sig, expected, 8) == 0);
}

TEST_CASE("transform json round trip") {
  pointgen::AffineTransform t;
  t.offset = {1.5, -2.0};
  t.scale = {0.5, 4.0};
  t.degenerate = {false, true};
  auto back = io::transform_from_json(io::transform_to_json(t));
  CHECK(back.offset == t.offset);
  CHECK(back.scale == t.scale);
  CHECK(back.degenerate == t.degenerate);
  CHECK(!back.identity);
}
