#include "ganbench/io.hpp"

#include <png.h>

#include <bit>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "ganbench/errors.hpp"
#include "json.hpp"

static_assert(std::endian::native == std::endian::little,
              "file formats are little-endian; big-endian hosts are unsupported");

namespace ganbench::io {

using nlohmann::json;
namespace fs = std::filesystem;

uint64_t fnv1a(const void* data, size_t len, uint64_t h) {
  const auto* p = static_cast<const uint8_t*>(data);
  for (size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 1099511628211ULL;
  }
  return h;
}

uint64_t hash_string(const std::string& s) { return fnv1a(s.data(), s.size()); }

uint64_t hash_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path);
  uint64_t h = 14695981039346656037ULL;
  char buf[1 << 16];
  while (f) {
    f.read(buf, sizeof(buf));
    h = fnv1a(buf, static_cast<size_t>(f.gcount()), h);
  }
  return h;
}

std::string hex64(uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string read_text_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path);
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << content;
}

void ensure_dir(const std::string& path) { fs::create_directories(path); }

namespace {

void write_raw_f32(const std::string& path, const float* data, int64_t n) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot write " + path);
  f.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(n * 4));
}

std::vector<float> read_raw_f32(const std::string& path, int64_t expected) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path);
  std::vector<float> out(static_cast<size_t>(expected));
  f.read(reinterpret_cast<char*>(out.data()), static_cast<std::streamsize>(expected * 4));
  if (f.gcount() != static_cast<std::streamsize>(expected * 4))
    throw std::runtime_error("short read from " + path);
  return out;
}

}  // namespace

std::string transform_to_json(const pointgen::AffineTransform& t) {
  json j;
  j["identity"] = t.identity;
  j["offset"] = t.offset;
  j["scale"] = t.scale;
  j["degenerate"] = t.degenerate;
  return j.dump();
}

pointgen::AffineTransform transform_from_json(const std::string& s) {
  json j = json::parse(s);
  pointgen::AffineTransform t;
  t.identity = j.value("identity", false);
  if (j.contains("offset")) t.offset = j["offset"].get<std::vector<double>>();
  if (j.contains("scale")) t.scale = j["scale"].get<std::vector<double>>();
  if (j.contains("degenerate")) t.degenerate = j["degenerate"].get<std::vector<bool>>();
  return t;
}

void save_point_dataset(const pointgen::PointDataset& ds, const std::string& stem,
                        const pointgen::AffineTransform* normalization) {
  const int64_t n = ds.n();
  const int d = ds.d();
  std::vector<float> payload(static_cast<size_t>(n * d));
  for (int64_t i = 0; i < n * d; ++i) payload[static_cast<size_t>(i)] = static_cast<float>(ds.points[i]);
  write_raw_f32(stem + ".f32", payload.data(), n * d);

  json j;
  j["kind"] = pointgen::kind_name(ds.kind);
  j["n"] = n;
  j["d"] = d;
  j["noise"] = ds.noise;
  j["seed"] = ds.seed;
  json params;
  if (ds.kind == pointgen::Kind::blobs) {
    json centers = json::array();
    for (const auto& c : ds.blob_spec.centers) centers.push_back({c[0], c[1]});
    params["centers"] = centers;
    params["std"] = ds.blob_spec.std_dev;
  } else if (ds.kind == pointgen::Kind::circles) {
    params["factor"] = ds.circle_factor;
  }
  j["params"] = params;
  j["normalization"] = normalization ? json::parse(transform_to_json(*normalization)) : json();
  json meta;
  if (!ds.labels.empty()) meta["labels"] = ds.labels;
  if (!ds.t_param.empty()) meta["t"] = ds.t_param;
  if (!ds.u_param.empty()) meta["u"] = ds.u_param;
  j["metadata"] = meta;
  j["format"] = {{"file", fs::path(stem + ".f32").filename().string()},
                 {"dtype", "float32"},
                 {"order", "row_major"},
                 {"endian", "little"}};
  write_text_file(stem + ".json", j.dump(2));
}

pointgen::PointDataset load_point_dataset(const std::string& stem,
                                          pointgen::AffineTransform* normalization_out) {
  json j = json::parse(read_text_file(stem + ".json"));
  pointgen::PointDataset ds;
  ds.kind = pointgen::kind_from_name(j.at("kind").get<std::string>());
  const int64_t n = j.at("n").get<int64_t>();
  const int d = j.at("d").get<int>();
  ds.noise = j.value("noise", 0.0);
  ds.seed = j.value("seed", 0ULL);
  const auto payload = read_raw_f32(stem + ".f32", n * d);
  ds.points = core::Tensor<double>({n, d});
  for (int64_t i = 0; i < n * d; ++i) ds.points[i] = payload[static_cast<size_t>(i)];
  if (j.contains("params")) {
    const auto& p = j["params"];
    if (p.contains("centers")) {
      ds.blob_spec.centers.clear();
      for (const auto& c : p["centers"])
        ds.blob_spec.centers.push_back({c[0].get<double>(), c[1].get<double>()});
      ds.blob_spec.std_dev = p.value("std", 1.0);
    }
    if (p.contains("factor")) ds.circle_factor = p["factor"].get<double>();
  }
  if (j.contains("metadata")) {
    const auto& m = j["metadata"];
    if (m.contains("labels")) ds.labels = m["labels"].get<std::vector<int>>();
    if (m.contains("t")) ds.t_param = m["t"].get<std::vector<double>>();
    if (m.contains("u")) ds.u_param = m["u"].get<std::vector<double>>();
  }
  if (normalization_out) {
    if (j.contains("normalization") && !j["normalization"].is_null())
      *normalization_out = transform_from_json(j["normalization"].dump());
    else
      *normalization_out = pointgen::AffineTransform::make_identity();
  }
  return ds;
}

void save_image_dataset(const scenegen::ImageDataset& ds, const std::string& stem) {
  const int64_t n = ds.n();
  const int64_t c = n ? ds.images.dim(1) : 0;
  const int64_t h = n ? ds.images.dim(2) : 0;
  const int64_t w = n ? ds.images.dim(3) : 0;
  // memory NCHW -> file NHWC
  std::vector<float> payload(static_cast<size_t>(ds.images.size()));
  for (int64_t i = 0; i < n; ++i)
    for (int64_t y = 0; y < h; ++y)
      for (int64_t x = 0; x < w; ++x)
        for (int64_t ch = 0; ch < c; ++ch)
          payload[static_cast<size_t>(((i * h + y) * w + x) * c + ch)] = ds.images.at4(i, ch, y, x);
  write_raw_f32(stem + ".f32", payload.data(), static_cast<int64_t>(payload.size()));

  json j;
  j["name"] = scenegen::dataset_name_str(ds.name);
  j["n"] = n;
  j["h"] = h;
  j["w"] = w;
  j["c"] = c;
  j["seed"] = ds.seed;
  j["anchor_mode"] = ds.anchor_mode == scenegen::AnchorMode::uniform ? "uniform" : "gaussian";
  j["rejections"] = ds.total_rejections;
  j["generator_version"] = 1;
  json anns = json::array();
  for (const auto& a : ds.annotations) {
    json shapes = json::array();
    for (const auto& s : a.shapes) {
      const char* kind = s.kind == scenegen::ShapeKind::square
                             ? "square"
                             : (s.kind == scenegen::ShapeKind::circle ? "circle" : "triangle");
      shapes.push_back({{"kind", kind},
                        {"x", s.x},
                        {"y", s.y},
                        {"size", s.size},
                        {"color", {s.color[0], s.color[1], s.color[2]}}});
    }
    anns.push_back(shapes);
  }
  j["annotations"] = anns;
  j["format"] = {{"file", fs::path(stem + ".f32").filename().string()},
                 {"dtype", "float32"},
                 {"layout", "nhwc"},
                 {"endian", "little"}};
  write_text_file(stem + ".json", j.dump());
}

scenegen::ImageDataset load_image_dataset(const std::string& stem) {
  json j = json::parse(read_text_file(stem + ".json"));
  scenegen::ImageDataset ds;
  ds.name = scenegen::dataset_name_from_str(j.at("name").get<std::string>());
  const int64_t n = j.at("n").get<int64_t>();
  const int64_t h = j.at("h").get<int64_t>();
  const int64_t w = j.at("w").get<int64_t>();
  const int64_t c = j.at("c").get<int64_t>();
  ds.seed = j.value("seed", 0ULL);
  ds.total_rejections = j.value("rejections", 0LL);
  ds.anchor_mode = j.value("anchor_mode", "uniform") == std::string("gaussian")
                       ? scenegen::AnchorMode::gaussian
                       : scenegen::AnchorMode::uniform;
  const auto payload = read_raw_f32(stem + ".f32", n * c * h * w);
  ds.images = core::Tensor<float>({n, c, h, w});
  for (int64_t i = 0; i < n; ++i)
    for (int64_t y = 0; y < h; ++y)
      for (int64_t x = 0; x < w; ++x)
        for (int64_t ch = 0; ch < c; ++ch)
          ds.images.at4(i, ch, y, x) = payload[static_cast<size_t>(((i * h + y) * w + x) * c + ch)];
  for (const auto& shapes : j.at("annotations")) {
    scenegen::SceneAnnotation a;
    a.height = static_cast<int>(h);
    a.width = static_cast<int>(w);
    a.channels = static_cast<int>(c);
    for (const auto& s : shapes) {
      scenegen::ShapeInstance si;
      const std::string kind = s.at("kind").get<std::string>();
      si.kind = kind == "square" ? scenegen::ShapeKind::square
                                 : (kind == "circle" ? scenegen::ShapeKind::circle
                                                     : scenegen::ShapeKind::triangle);
      si.x = s.at("x").get<int>();
      si.y = s.at("y").get<int>();
      si.size = s.at("size").get<int>();
      si.color = {s.at("color")[0].get<float>(), s.at("color")[1].get<float>(),
                  s.at("color")[2].get<float>()};
      a.shapes.push_back(si);
    }
    ds.annotations.push_back(std::move(a));
  }
  return ds;
}

// ---- PNG ----------------------------------------------------------------

namespace {

void write_png(const std::string& path, const uint8_t* pixels, int w, int h, int color_type,
               int channels) {
  FILE* fp = std::fopen(path.c_str(), "wb");
  if (!fp) throw std::runtime_error("cannot write " + path);
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png_create_info_struct(png);
  if (!png || !info || setjmp(png_jmpbuf(png))) {
    if (png) png_destroy_write_struct(&png, &info);
    std::fclose(fp);
    throw std::runtime_error("libpng failure writing " + path);
  }
  png_init_io(png, fp);
  png_set_IHDR(png, info, static_cast<png_uint_32>(w), static_cast<png_uint_32>(h), 8, color_type,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  std::vector<png_bytep> rows(static_cast<size_t>(h));
  for (int y = 0; y < h; ++y)
    rows[static_cast<size_t>(y)] = const_cast<png_bytep>(pixels + static_cast<size_t>(y) * w * channels);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  std::fclose(fp);
}

}  // namespace

void write_png_gray(const std::string& path, const uint8_t* pixels, int w, int h) {
  write_png(path, pixels, w, h, PNG_COLOR_TYPE_GRAY, 1);
}

void write_png_rgb(const std::string& path, const uint8_t* pixels, int w, int h) {
  write_png(path, pixels, w, h, PNG_COLOR_TYPE_RGB, 3);
}

void write_image_png(const std::string& path, const core::Tensor<float>& image) {
  if (image.ndim() != 3) throw std::invalid_argument("write_image_png: expected [C,H,W]");
  const int c = static_cast<int>(image.dim(0));
  const int h = static_cast<int>(image.dim(1));
  const int w = static_cast<int>(image.dim(2));
  auto to8 = [](float v) {
    const float u = (v + 1.0f) * 0.5f;
    return static_cast<uint8_t>(std::max(0.0f, std::min(255.0f, u * 255.0f + 0.5f)));
  };
  if (c == 1) {
    std::vector<uint8_t> px(static_cast<size_t>(h * w));
    for (int i = 0; i < h * w; ++i) px[static_cast<size_t>(i)] = to8(image[i]);
    write_png_gray(path, px.data(), w, h);
  } else {
    std::vector<uint8_t> px(static_cast<size_t>(h * w * 3));
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x)
        for (int ch = 0; ch < 3; ++ch)
          px[static_cast<size_t>((y * w + x) * 3 + ch)] =
              to8(image[(std::min(ch, c - 1) * h + y) * w + x]);
    write_png_rgb(path, px.data(), w, h);
  }
}

// ---- checkpoints ----------------------------------------------------------

namespace {

constexpr char kMagic[4] = {'G', 'B', 'C', 'P'};
constexpr uint32_t kVersion = 1;

template <typename T>
void put(std::ofstream& f, const T& v) {
  f.write(reinterpret_cast<const char*>(&v), sizeof(T));
}
template <typename T>
T get(std::ifstream& f) {
  T v{};
  f.read(reinterpret_cast<char*>(&v), sizeof(T));
  return v;
}

void put_entry(std::ofstream& f, const std::string& name, const core::Tensor<float>& t) {
  put<uint16_t>(f, static_cast<uint16_t>(name.size()));
  f.write(name.data(), static_cast<std::streamsize>(name.size()));
  put<uint8_t>(f, 0);  // dtype f32
  put<uint8_t>(f, static_cast<uint8_t>(t.ndim()));
  for (int i = 0; i < t.ndim(); ++i) put<uint32_t>(f, static_cast<uint32_t>(t.dim(i)));
  f.write(reinterpret_cast<const char*>(t.data()), static_cast<std::streamsize>(t.size() * 4));
}

}  // namespace

void save_checkpoint(const std::string& path, const gancore::GanModel<float>& model,
                     const nn::Optimizer<float>* gopt, const nn::Optimizer<float>* copt,
                     const CheckpointMeta& meta) {
  std::vector<std::pair<std::string, core::Tensor<float>>> entries;
  for (const auto& p : model.generator.named_params()) entries.emplace_back("g." + p.name, p.var->value);
  for (const auto& p : model.critic.named_params()) entries.emplace_back("c." + p.name, p.var->value);
  for (const auto& b : model.generator.named_buffers())
    entries.emplace_back("gbuf." + b.name, *b.tensor);
  for (const auto& b : model.critic.named_buffers()) entries.emplace_back("cbuf." + b.name, *b.tensor);
  if (gopt)
    for (const auto& [k, v] : gopt->state()) entries.emplace_back("gopt." + k, v);
  if (copt)
    for (const auto& [k, v] : copt->state()) entries.emplace_back("copt." + k, v);

  const std::string spec_json = model.spec.to_json_string();
  json meta_j;
  meta_j["model_spec"] = json::parse(spec_json);
  meta_j["step"] = meta.step;
  meta_j["extra"] = json::parse(meta.extra_json);
  const std::string meta_str = meta_j.dump();

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot write " + path);
  f.write(kMagic, 4);
  put<uint32_t>(f, kVersion);
  put<uint64_t>(f, hash_string(spec_json));
  put<uint32_t>(f, static_cast<uint32_t>(meta_str.size()));
  f.write(meta_str.data(), static_cast<std::streamsize>(meta_str.size()));
  put<uint32_t>(f, static_cast<uint32_t>(entries.size()));
  for (const auto& [name, t] : entries) put_entry(f, name, t);
}

LoadedCheckpoint load_checkpoint(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open checkpoint " + path);
  char magic[4];
  f.read(magic, 4);
  if (std::memcmp(magic, kMagic, 4) != 0)
    throw IncompatibleCheckpointError("bad checkpoint magic in " + path);
  const uint32_t version = get<uint32_t>(f);
  if (version != kVersion)
    throw IncompatibleCheckpointError("unsupported checkpoint version in " + path);
  const uint64_t spec_hash = get<uint64_t>(f);
  const uint32_t meta_len = get<uint32_t>(f);
  std::string meta_str(meta_len, '\0');
  f.read(meta_str.data(), meta_len);
  json meta_j = json::parse(meta_str);

  LoadedCheckpoint out;
  const std::string spec_json = meta_j.at("model_spec").dump();
  if (hash_string(spec_json) != spec_hash)
    throw IncompatibleCheckpointError("spec hash mismatch in " + path);
  out.spec = gancore::ModelSpec::from_json_string(spec_json);
  out.meta.step = meta_j.value("step", 0LL);
  out.meta.extra_json = meta_j.value("extra", json::object()).dump();

  const uint32_t n_entries = get<uint32_t>(f);
  for (uint32_t i = 0; i < n_entries; ++i) {
    const uint16_t name_len = get<uint16_t>(f);
    std::string name(name_len, '\0');
    f.read(name.data(), name_len);
    const uint8_t dtype = get<uint8_t>(f);
    if (dtype != 0) throw IncompatibleCheckpointError("unsupported dtype in " + path);
    const uint8_t ndim = get<uint8_t>(f);
    std::vector<int64_t> dims(ndim);
    for (uint8_t d = 0; d < ndim; ++d) dims[d] = get<uint32_t>(f);
    core::Tensor<float> t(dims);
    f.read(reinterpret_cast<char*>(t.data()), static_cast<std::streamsize>(t.size() * 4));
    out.entries.emplace(std::move(name), std::move(t));
  }
  if (!f) throw IncompatibleCheckpointError("truncated checkpoint " + path);
  return out;
}

namespace {

void copy_into(const LoadedCheckpoint& ck, const std::string& name, core::Tensor<float>& dst) {
  auto it = ck.entries.find(name);
  if (it == ck.entries.end())
    throw IncompatibleCheckpointError("checkpoint missing entry " + name);
  if (!(it->second.shape() == dst.shape()))
    throw IncompatibleCheckpointError("checkpoint shape mismatch for " + name);
  std::copy(it->second.begin(), it->second.end(), dst.begin());
}

std::unordered_map<std::string, core::Tensor<float>> extract_prefix(
    const LoadedCheckpoint& ck, const std::string& prefix) {
  std::unordered_map<std::string, core::Tensor<float>> out;
  for (const auto& [k, v] : ck.entries)
    if (k.rfind(prefix, 0) == 0) out.emplace(k.substr(prefix.size()), v);
  return out;
}

}  // namespace

void apply_checkpoint(const LoadedCheckpoint& ck, gancore::GanModel<float>& model,
                      nn::Optimizer<float>* gopt, nn::Optimizer<float>* copt) {
  for (const auto& p : model.generator.named_params()) copy_into(ck, "g." + p.name, p.var->value);
  for (const auto& p : model.critic.named_params()) copy_into(ck, "c." + p.name, p.var->value);
  for (const auto& b : model.generator.named_buffers()) copy_into(ck, "gbuf." + b.name, *b.tensor);
  for (const auto& b : model.critic.named_buffers()) copy_into(ck, "cbuf." + b.name, *b.tensor);
  if (gopt) gopt->load_state(extract_prefix(ck, "gopt."));
  if (copt) copt->load_state(extract_prefix(ck, "copt."));
}

uint64_t model_weights_hash(const gancore::GanModel<float>& model) {
  uint64_t h = 14695981039346656037ULL;
  auto mix = [&](const core::Tensor<float>& t) { h = fnv1a(t.data(), static_cast<size_t>(t.size()) * 4, h); };
  for (const auto& p : model.generator.named_params()) mix(p.var->value);
  for (const auto& p : model.critic.named_params()) mix(p.var->value);
  for (const auto& b : model.generator.named_buffers()) mix(*b.tensor);
  for (const auto& b : model.critic.named_buffers()) mix(*b.tensor);
  return h;
}

}  // namespace ganbench::io
