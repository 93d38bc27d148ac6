// ganbench command line: gen-data / train / eval / transfer / report.
// Experiments are described by a single JSON config (see configs/) with
// dotted-path overrides via --set; every artifact written carries the
// config hash.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <variant>

#include "CLI11.hpp"
#include "json.hpp"

#include "ganbench/errors.hpp"
#include "ganbench/evaluator.hpp"
#include "ganbench/gancore.hpp"
#include "ganbench/io.hpp"
#include "ganbench/plot.hpp"
#include "ganbench/pointgen.hpp"
#include "ganbench/scenegen.hpp"
#include "ganbench/trainer.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace ganbench;

namespace {

// ---- config -----------------------------------------------------------

json default_config() {
  return json{{"dataset", {{"kind", "blobs"}, {"n", 5000}, {"seed", 7}}},
              {"model", json::object()},
              {"training", json::object()},
              {"eval", json::object()},
              {"output_dir", ""}};
}

void apply_override(json& cfg, const std::string& kv) {
  const auto eq = kv.find('=');
  if (eq == std::string::npos) throw ConfigError("--set expects key.path=value: " + kv);
  std::string path = kv.substr(0, eq);
  const std::string value = kv.substr(eq + 1);
  json* node = &cfg;
  size_t pos = 0;
  while (true) {
    const auto dot = path.find('.', pos);
    const std::string key = path.substr(pos, dot == std::string::npos ? dot : dot - pos);
    if (dot == std::string::npos) {
      json parsed;
      try {
        parsed = json::parse(value);
      } catch (...) {
        parsed = value;  // bare string
      }
      (*node)[key] = parsed;
      return;
    }
    node = &(*node)[key];
    pos = dot + 1;
  }
}

json load_config(const std::string& path, const std::vector<std::string>& overrides) {
  json cfg = default_config();
  if (!path.empty()) {
    json user;
    try {
      user = json::parse(io::read_text_file(path));
    } catch (const std::exception& e) {
      throw ConfigError(std::string("cannot parse config: ") + e.what());
    }
    cfg.merge_patch(user);
  }
  for (const auto& kv : overrides) apply_override(cfg, kv);
  return cfg;
}

std::string config_hash8(const json& cfg) { return io::hex64(io::hash_string(cfg.dump())).substr(0, 8); }

std::string output_root(const json& cfg) {
  std::string dir = cfg.value("output_dir", "");
  if (dir.empty()) {
    const char* env = std::getenv("GANBENCH_OUT");
    dir = env ? env : "out";
  }
  return dir;
}

double noise_value(const json& ds, double fallback) {
  if (!ds.contains("noise")) return fallback;
  if (ds["noise"].is_string()) {
    const std::string s = ds["noise"].get<std::string>();
    if (s == "minimal") return 0.0;
    if (s == "moderate") return 0.05;
    if (s == "extra") return 0.15;
    throw ConfigError("unknown noise level name: " + s);
  }
  return ds["noise"].get<double>();
}

struct DatasetBundle {
  bool is_image = false;
  std::string kind;
  pointgen::PointDataset points;
  scenegen::ImageDataset images;
  uint64_t seed = 0;
  double noise = 0.0;
};

bool is_image_kind(const std::string& kind) {
  return kind.rfind("squares_", 0) == 0 || kind == "ct2";
}

DatasetBundle build_dataset(const json& cfg) {
  const json& ds = cfg.at("dataset");
  DatasetBundle out;
  out.kind = ds.value("kind", "blobs");
  const int64_t n = ds.value("n", 5000);
  out.seed = ds.value("seed", 7ULL);
  if (is_image_kind(out.kind)) {
    out.is_image = true;
    const auto mode = ds.value("anchor_mode", "uniform") == std::string("gaussian")
                          ? scenegen::AnchorMode::gaussian
                          : scenegen::AnchorMode::uniform;
    out.images = scenegen::gen_image_dataset(scenegen::dataset_name_from_str(out.kind), n,
                                             out.seed, mode);
  } else {
    const auto kind = pointgen::kind_from_name(out.kind);
    out.noise = noise_value(ds, kind == pointgen::Kind::blobs ? 1.0 : 0.05);
    pointgen::BlobSpec blobs;
    if (ds.contains("centers")) {
      blobs.centers.clear();
      for (const auto& c : ds["centers"])
        blobs.centers.push_back({c[0].get<double>(), c[1].get<double>()});
    }
    const double factor = ds.value("factor", 0.5);
    out.points = pointgen::generate(kind, n, out.noise, out.seed, blobs, factor);
  }
  return out;
}

gancore::ModelSpec model_spec_from_config(const json& cfg, const DatasetBundle& data) {
  const json& m = cfg.value("model", json::object());
  gancore::ModelSpec spec;
  const std::string fam = m.value("family", data.is_image ? "dcgan" : "mlp_wgan_gp");
  spec.family = gancore::family_from_name(fam);
  if (spec.is_image() != data.is_image)
    throw ConfigError("model family " + fam + " cannot train on dataset " + data.kind);
  if (data.is_image)
    spec.image_channels = static_cast<int>(data.images.images.dim(1));
  else
    spec.point_dim = data.points.d();
  spec.latent_dim = m.value("latent_dim", 0);
  if (m.contains("hidden")) spec.hidden = m["hidden"].get<std::vector<int>>();
  if (m.contains("gen_channels")) spec.gen_channels = m["gen_channels"].get<std::vector<int>>();
  if (m.contains("disc_channels")) spec.disc_channels = m["disc_channels"].get<std::vector<int>>();
  spec.leaky_slope = m.value("leaky_slope", 0.2);
  spec.dropout = m.value("dropout", 0.3);
  spec.critic_batchnorm = m.value("critic_batchnorm", true);
  spec.validate();
  return spec;
}

trainer::TrainSpec train_spec_from_config(const json& cfg) {
  const json& t = cfg.value("training", json::object());
  trainer::TrainSpec ts = trainer::TrainSpec::from_json_string(t.dump());
  return ts;
}

std::string timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t tt = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y%m%d-%H%M%S", std::localtime(&tt));
  return buf;
}

std::string make_run_dir(const json& cfg, const std::string& label, bool force) {
  const std::string root = output_root(cfg);
  const std::string hash = config_hash8(cfg);
  std::string dir;
  if (force) {
    dir = root + "/" + label + "-" + hash;
    fs::remove_all(dir);
  } else {
    dir = root + "/" + label + "-" + timestamp() + "-" + hash;
    int suffix = 0;
    while (fs::exists(dir))
      dir = root + "/" + label + "-" + timestamp() + "-" + hash + "." + std::to_string(++suffix);
  }
  io::ensure_dir(dir);
  return dir;
}

trainer::Sinks make_sinks(const std::string& run_dir, std::vector<json>* checkpoint_log) {
  trainer::Sinks sinks;
  io::ensure_dir(run_dir + "/checkpoints");
  io::ensure_dir(run_dir + "/snapshots");
  sinks.checkpoint = [run_dir, checkpoint_log](const gancore::GanModel<float>& model,
                                               const nn::Optimizer<float>& gopt,
                                               const nn::Optimizer<float>& copt, int64_t step,
                                               const std::string& tag) {
    const std::string path =
        run_dir + "/checkpoints/ckpt_" + std::to_string(step) + (tag == "final" ? "_final" : "") +
        ".gbcp";
    io::CheckpointMeta meta;
    meta.step = step;
    meta.extra_json = json{{"tag", tag}}.dump();
    io::save_checkpoint(path, model, &gopt, &copt, meta);
    if (checkpoint_log) checkpoint_log->push_back({{"step", step}, {"path", path}, {"tag", tag}});
    return path;
  };
  sinks.snapshot = [run_dir](int64_t step, const core::Tensor<float>& samples) {
    if (samples.ndim() == 4)
      plot::save_sample_grid(run_dir + "/snapshots/step_" + std::to_string(step) + ".png", samples);
  };
  return sinks;
}

std::string find_final_checkpoint(const std::string& run_dir) {
  const json manifest = json::parse(io::read_text_file(run_dir + "/manifest.json"));
  std::string best;
  int64_t best_step = -1;
  for (const auto& c : manifest.value("checkpoints", json::array())) {
    const int64_t s = c.value("step", 0LL);
    if (s > best_step) {
      best_step = s;
      best = c.value("path", "");
    }
  }
  if (best.empty()) throw ConfigError("run has no checkpoints: " + run_dir);
  return best;
}

// ---- eval helpers -----------------------------------------------------

core::Tensor<double> to_double_points(const core::Tensor<float>& t) {
  return t.cast<double>();
}

evaluator::EvalReport eval_points(const core::Tensor<double>& samples,
                                  const DatasetBundle& data, const json& ecfg) {
  evaluator::EvalReport rep;
  rep.kind = data.kind;
  rep.n_samples = samples.dim(0);
  const auto kind = pointgen::kind_from_name(data.kind);
  if (kind == pointgen::Kind::blobs) {
    const double radius = ecfg.value("radius", 0.0) > 0.0
                              ? ecfg["radius"].get<double>()
                              : 3.0 * data.points.blob_spec.std_dev;
    rep.coverage = evaluator::mode_coverage(samples, data.points.blob_spec.centers, radius,
                                            ecfg.value("coverage_min", 0.01));
  }
  if (kind == pointgen::Kind::circles) {
    rep.rings = evaluator::ring_membership(samples, data.points.circle_factor, 1.0,
                                           ecfg.value("tol", 0.15));
  }
  if (kind != pointgen::Kind::blobs) {
    evaluator::ManifoldSpec ms;
    ms.kind = kind;
    ms.circle_factor = data.points.circle_factor;
    ms.blobs = data.points.blob_spec;
    rep.manifold = evaluator::manifold_distance(samples, ms, ecfg.value("m_ref", 100000LL));
  }
  return rep;
}

evaluator::EvalReport eval_images(const core::Tensor<float>& images, const std::string& kind,
                                  const json& ecfg) {
  evaluator::CountParams cp;
  cp.tau = ecfg.value("tau", 0.0f);
  cp.min_area = ecfg.value("min_area", 4);
  evaluator::EvalReport rep;
  rep.kind = kind;
  rep.n_samples = images.dim(0);
  auto hist = evaluator::count_histogram(images, cp);
  const int expected = scenegen::dataset_geometry(scenegen::dataset_name_from_str(kind)).count;
  rep.expected_count = expected;
  rep.exact_count_rate = hist.exact_rate(expected);
  rep.axis_aligned_rate = hist.axis_aligned_rate();
  rep.histogram = std::move(hist);
  rep.notes.push_back(
      "reference finding: trained GANs on Squares 3-4 produced anything between 0 and 5 "
      "squares; this histogram is the quantitative counterpart");
  return rep;
}

// ---- commands -----------------------------------------------------------

int cmd_gen_data(const json& cfg, bool force, int png_count) {
  auto data = build_dataset(cfg);
  const std::string dir = make_run_dir(cfg, "data-" + data.kind, force);
  const std::string stem = dir + "/data";
  json manifest;
  manifest["config"] = cfg;
  manifest["config_hash"] = config_hash8(cfg);
  manifest["kind"] = data.kind;
  manifest["generator_version"] = 1;
  if (data.is_image) {
    io::save_image_dataset(data.images, stem);
    manifest["n"] = data.images.n();
    manifest["rejections"] = data.images.total_rejections;
    manifest["count"] =
        scenegen::dataset_geometry(data.images.name).count;
    for (int i = 0; i < png_count && i < data.images.n(); ++i) {
      core::Tensor<float> img({data.images.images.dim(1), data.images.images.dim(2),
                               data.images.images.dim(3)});
      const int64_t per = img.size();
      std::copy(data.images.images.begin() + i * per, data.images.images.begin() + (i + 1) * per,
                img.begin());
      io::write_image_png(dir + "/img_" + std::to_string(i) + ".png", img);
    }
    std::cout << "wrote " << data.images.n() << " images to " << stem << ".f32 (rejections: "
              << data.images.total_rejections << ")\n";
  } else {
    io::save_point_dataset(data.points, stem);
    manifest["n"] = data.points.n();
    std::cout << "wrote " << data.points.n() << "x" << data.points.d() << " points to " << stem
              << ".f32\n";
  }
  manifest["data_hash"] = io::hex64(io::hash_file(stem + ".f32"));
  io::write_text_file(dir + "/manifest.json", manifest.dump(2));
  std::cout << "dataset dir: " << dir << "\n";
  return 0;
}

int run_training(const json& cfg, const DatasetBundle& data, trainer::TrainSpec ts,
                 const std::string& label, std::optional<std::string> transfer_source,
                 std::optional<std::string> resume_from, bool force) {
  const auto mspec = model_spec_from_config(cfg, data);
  const std::string run_dir = make_run_dir(cfg, label, force);
  std::vector<json> checkpoint_log;
  auto sinks = make_sinks(run_dir, &checkpoint_log);

  trainer::TrainData td = data.is_image ? trainer::TrainData::from_images(data.images)
                                        : trainer::TrainData::from_points(data.points);

  trainer::TrainResult result;
  if (transfer_source) {
    auto ck = io::load_checkpoint(*transfer_source);
    result = trainer::transfer_finetune(ck, td, ts, sinks);
  } else if (resume_from) {
    auto ck = io::load_checkpoint(*resume_from);
    auto model = gancore::build_model<float>(ck.spec, core::derive_stream(ts.seed, 0));
    auto [gopt, copt] = trainer::make_optimizers(ck.spec.family, ts);
    io::apply_checkpoint(ck, model, gopt.get(), copt.get());
    trainer::TrainOptions opt;
    opt.start_gen_step = ck.meta.step;
    result = trainer::train_model(std::move(model), std::move(gopt), std::move(copt), ts, td,
                                  sinks, opt);
  } else {
    result = trainer::train(mspec, ts, td, sinks);
  }

  result.history.to_csv(run_dir + "/history.csv");
  json manifest;
  manifest["config"] = cfg;
  manifest["config_hash"] = config_hash8(cfg);
  manifest["model_spec"] = json::parse(result.model.spec.to_json_string());
  manifest["train_spec"] = json::parse(ts.to_json_string());
  const auto resolved = ts.resolve(result.model.spec.family);
  manifest["resolved"] = {{"optimizer", resolved.optimizer},
                          {"learning_rate", resolved.learning_rate},
                          {"critic_steps_per_gen", resolved.critic_steps},
                          {"step_unit", "generator_steps"}};
  manifest["dataset"] = cfg.at("dataset");
  manifest["stop_reason"] = result.stop_reason;
  manifest["gen_steps"] = result.gen_steps;
  manifest["deterministic"] = ts.deterministic;
  manifest["weights_hash"] = io::hex64(io::model_weights_hash(result.model));
  if (transfer_source) manifest["transfer_source"] = *transfer_source;
  if (resume_from) manifest["resumed_from"] = *resume_from;
  manifest["checkpoints"] = checkpoint_log;
  io::write_text_file(run_dir + "/manifest.json", manifest.dump(2));
  std::cout << "run dir: " << run_dir << "\nstop: " << result.stop_reason << " after "
            << result.gen_steps << " generator steps\n";
  return 0;
}

int cmd_train(const json& cfg, const std::string& dataset_path,
              std::optional<std::string> resume_from, bool force) {
  DatasetBundle data;
  if (!dataset_path.empty()) {
    if (fs::exists(dataset_path + ".json")) {
      json sidecar = json::parse(io::read_text_file(dataset_path + ".json"));
      data.is_image = sidecar.contains("annotations");
      if (data.is_image) {
        data.images = io::load_image_dataset(dataset_path);
        data.kind = scenegen::dataset_name_str(data.images.name);
      } else {
        data.points = io::load_point_dataset(dataset_path);
        data.kind = pointgen::kind_name(data.points.kind);
      }
    } else {
      throw ConfigError("dataset not found: " + dataset_path);
    }
  } else {
    data = build_dataset(cfg);
  }
  auto ts = train_spec_from_config(cfg);
  const auto mspec = model_spec_from_config(cfg, data);  // validates pairing before compute
  const std::string label = gancore::family_name(mspec.family) + "-" + data.kind;
  return run_training(cfg, data, ts, label, std::nullopt, resume_from, force);
}

int cmd_transfer(const json& cfg, const std::string& source, bool force) {
  std::string ckpt = source;
  if (fs::is_directory(source)) ckpt = find_final_checkpoint(source);
  auto data = build_dataset(cfg);
  auto ts = train_spec_from_config(cfg);
  const std::string label = "transfer-" + data.kind;
  return run_training(cfg, data, ts, label, ckpt, std::nullopt, force);
}

int cmd_eval(const json& cfg_cli, const std::string& run_dir, const std::string& dataset_path,
             bool force) {
  (void)force;
  if (!run_dir.empty()) {
    const json manifest = json::parse(io::read_text_file(run_dir + "/manifest.json"));
    json cfg = manifest.value("config", default_config());
    for (const auto& [k, v] : cfg_cli.value("eval", json::object()).items()) cfg["eval"][k] = v;
    const json ecfg = cfg.value("eval", json::object());

    auto data = build_dataset(cfg);
    const std::string ckpt_path = find_final_checkpoint(run_dir);
    auto ck = io::load_checkpoint(ckpt_path);
    auto model = gancore::build_model<float>(ck.spec, 0);
    io::apply_checkpoint(ck, model);

    const int64_t n_samples = ecfg.value("n_samples", 1000LL);
    const uint64_t eval_seed = ecfg.value("seed", 99ULL);
    trainer::TrainData td = data.is_image ? trainer::TrainData::from_images(data.images)
                                          : trainer::TrainData::from_points(data.points);
    auto samples = trainer::snapshot_samples(model.generator, n_samples, eval_seed, td.denorm);

    const std::string out_dir = run_dir + "/eval";
    io::ensure_dir(out_dir);
    evaluator::EvalReport rep;
    if (data.is_image) {
      rep = eval_images(samples, data.kind, ecfg);
      plot::save_sample_grid(out_dir + "/samples.png", samples);
    } else {
      auto dsamples = to_double_points(samples);
      rep = eval_points(dsamples, data, ecfg);
      plot::save_scatter(out_dir + "/scatter_xy.png", data.points.points, dsamples, 0, 1);
      if (data.points.d() == 3)
        plot::save_scatter(out_dir + "/scatter_xz.png", data.points.points, dsamples, 0, 2);
    }
    rep.provenance_json = json{{"run", run_dir},
                               {"checkpoint", ckpt_path},
                               {"config_hash", manifest.value("config_hash", "")},
                               {"eval_seed", eval_seed}}
                              .dump();
    io::write_text_file(out_dir + "/report.json", rep.to_json_string());
    std::cout << rep.to_json_string() << "\n";
    return 0;
  }
  if (!dataset_path.empty()) {
    // identity "generator": evaluate the dataset's own samples
    json cfg = cfg_cli;
    const json ecfg = cfg.value("eval", json::object());
    json sidecar = json::parse(io::read_text_file(dataset_path + ".json"));
    evaluator::EvalReport rep;
    std::string out_stem = dataset_path + "_report.json";
    if (sidecar.contains("annotations")) {
      auto ds = io::load_image_dataset(dataset_path);
      rep = eval_images(ds.images, scenegen::dataset_name_str(ds.name), ecfg);
    } else {
      auto ds = io::load_point_dataset(dataset_path);
      DatasetBundle b;
      b.is_image = false;
      b.kind = pointgen::kind_name(ds.kind);
      b.points = ds;
      rep = eval_points(ds.points, b, ecfg);
    }
    rep.provenance_json = json{{"dataset", dataset_path}, {"identity_generator", true}}.dump();
    io::write_text_file(out_stem, rep.to_json_string());
    std::cout << rep.to_json_string() << "\n";
    return 0;
  }
  throw ConfigError("eval: provide --run or --dataset");
}

json histogram_of_run(const std::string& run_dir, int64_t n_samples) {
  const json manifest = json::parse(io::read_text_file(run_dir + "/manifest.json"));
  json cfg = manifest.value("config", default_config());
  auto data = build_dataset(cfg);
  if (!data.is_image) throw ConfigError("histogram comparison needs image runs");
  auto ck = io::load_checkpoint(find_final_checkpoint(run_dir));
  auto model = gancore::build_model<float>(ck.spec, 0);
  io::apply_checkpoint(ck, model);
  auto samples = trainer::snapshot_samples(model.generator, n_samples, 99,
                                           pointgen::AffineTransform::make_identity());
  auto hist = evaluator::count_histogram(samples, {});
  json h = json::object();
  for (const auto& [k, v] : hist.counts) h[std::to_string(k)] = v;
  return h;
}

int cmd_report(const json& cfg_cli, const std::string& run_dir, const std::string& compare_dir) {
  const json manifest = json::parse(io::read_text_file(run_dir + "/manifest.json"));
  json cfg = manifest.value("config", default_config());
  const json ecfg = cfg_cli.value("eval", json::object());
  const int64_t n_samples = ecfg.value("n_samples", 1000LL);

  auto data = build_dataset(cfg);
  auto ck = io::load_checkpoint(find_final_checkpoint(run_dir));
  auto model = gancore::build_model<float>(ck.spec, 0);
  io::apply_checkpoint(ck, model);
  const std::string out_dir = run_dir + "/report";
  io::ensure_dir(out_dir);

  trainer::TrainData td = data.is_image ? trainer::TrainData::from_images(data.images)
                                        : trainer::TrainData::from_points(data.points);
  auto samples = trainer::snapshot_samples(model.generator, std::max<int64_t>(n_samples, 64),
                                           99, td.denorm);
  json rep;
  rep["run"] = run_dir;
  rep["config_hash"] = manifest.value("config_hash", "");
  rep["stop_reason"] = manifest.value("stop_reason", "");
  rep["gen_steps"] = manifest.value("gen_steps", 0);
  if (data.is_image) {
    plot::save_sample_grid(out_dir + "/samples.png", samples);
    rep["histogram"] = histogram_of_run(run_dir, n_samples);
    rep["note"] =
        "count histogram over generated samples; the reference observation on Squares 3-4 was "
        "anything between 0 and 5 squares";
    if (!compare_dir.empty()) {
      rep["compare_run"] = compare_dir;
      rep["compare_histogram"] = histogram_of_run(compare_dir, n_samples);
    }
  } else {
    auto dsamples = to_double_points(samples);
    plot::save_scatter(out_dir + "/scatter_xy.png", data.points.points, dsamples, 0, 1);
    if (data.points.d() == 3)
      plot::save_scatter(out_dir + "/scatter_xz.png", data.points.points, dsamples, 0, 2);
    rep["scatter"] = out_dir + "/scatter_xy.png";
  }
  io::write_text_file(out_dir + "/report.json", rep.dump(2));
  std::cout << rep.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ganbench: synthetic GAN benchmark harness"};
  app.require_subcommand(1);

  std::string config_path, dataset_path, run_dir, source, compare_dir;
  std::vector<std::string> overrides;
  bool force = false, deterministic = false;
  int png_count = 0;
  int64_t steps = -1;
  int64_t seed_override = -1;

  app.add_option("-c,--config", config_path, "experiment config JSON");
  app.add_option("--set", overrides, "override config values, key.path=value");
  app.add_flag("--force", force, "reuse a stable run dir, overwriting previous output");
  app.add_flag("--deterministic", deterministic, "run on the serial reference kernels");
  app.add_option("--steps", steps, "override training.max_steps");
  app.add_option("--seed", seed_override, "override dataset.seed and training.seed");

  auto* gen = app.add_subcommand("gen-data", "generate a dataset with sidecar + manifest");
  gen->add_option("--png", png_count, "export the first N images as PNGs");

  auto* train = app.add_subcommand("train", "train a model per the config");
  train->add_option("--dataset", dataset_path, "train on a saved dataset (file stem)");
  std::string resume_path;
  train->add_option("--resume", resume_path, "resume from a checkpoint file");

  auto* eval = app.add_subcommand("eval", "evaluate a run or a dataset");
  eval->add_option("--run", run_dir, "run directory");
  eval->add_option("--dataset", dataset_path, "dataset file stem (identity generator)");

  auto* transfer = app.add_subcommand("transfer", "fine-tune a checkpoint on a new dataset");
  transfer->add_option("--source", source, "source run dir or checkpoint file")->required();

  auto* report = app.add_subcommand("report", "emit sample grids / scatter plots / histograms");
  report->add_option("--run", run_dir, "run directory")->required();
  report->add_option("--compare", compare_dir, "second run for histogram comparison");

  CLI11_PARSE(app, argc, argv);

  try {
    json cfg = load_config(config_path, overrides);
    if (steps >= 0) cfg["training"]["max_steps"] = steps;
    if (seed_override >= 0) {
      cfg["dataset"]["seed"] = seed_override;
      cfg["training"]["seed"] = seed_override;
    }
    if (deterministic) cfg["training"]["deterministic"] = true;

    if (gen->parsed()) return cmd_gen_data(cfg, force, png_count);
    if (train->parsed())
      return cmd_train(cfg, dataset_path,
                       resume_path.empty() ? std::nullopt : std::make_optional(resume_path), force);
    if (eval->parsed()) return cmd_eval(cfg, run_dir, dataset_path, force);
    if (transfer->parsed()) return cmd_transfer(cfg, source, force);
    if (report->parsed()) return cmd_report(cfg, run_dir, compare_dir);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const InfeasibleSceneError& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    return 3;
  } catch (const NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return 4;
  } catch (const IncompatibleCheckpointError& e) {
    std::cerr << "incompatible checkpoint: " << e.what() << "\n";
    return 5;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
