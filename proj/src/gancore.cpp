#include "ganbench/gancore.hpp"

#include <stdexcept>

#include "json.hpp"

namespace ganbench::gancore {

using nlohmann::json;

std::string family_name(Family f) {
  switch (f) {
    case Family::mlp_gan: return "mlp_gan";
    case Family::mlp_wgan_gp: return "mlp_wgan_gp";
    case Family::dcgan: return "dcgan";
    case Family::conv_wgan_gp: return "conv_wgan_gp";
  }
  throw std::logic_error("family_name: bad enum");
}

Family family_from_name(const std::string& s) {
  if (s == "mlp_gan") return Family::mlp_gan;
  if (s == "mlp_wgan_gp") return Family::mlp_wgan_gp;
  if (s == "dcgan") return Family::dcgan;
  if (s == "conv_wgan_gp") return Family::conv_wgan_gp;
  throw std::invalid_argument("unknown model family: " + s);
}

void ModelSpec::validate() const {
  if (latent_dim < 0) throw std::invalid_argument("model: latent_dim must be >= 0");
  if (!is_image() && (point_dim < 2 || point_dim > 3))
    throw std::invalid_argument("model: point_dim must be 2 or 3");
  if (is_image() && image_channels != 1 && image_channels != 3)
    throw std::invalid_argument("model: image_channels must be 1 or 3");
  if (hidden.empty()) throw std::invalid_argument("model: hidden widths empty");
  for (int h : hidden)
    if (h < 1) throw std::invalid_argument("model: hidden width < 1");
  if (gen_channels.size() != 3) throw std::invalid_argument("model: gen_channels needs 3 entries");
  if (disc_channels.size() != 4)
    throw std::invalid_argument("model: disc_channels needs 4 entries");
  for (int c : gen_channels)
    if (c < 1) throw std::invalid_argument("model: gen channel < 1");
  for (int c : disc_channels)
    if (c < 1) throw std::invalid_argument("model: disc channel < 1");
  if (dropout < 0.0 || dropout >= 1.0) throw std::invalid_argument("model: dropout out of range");
}

std::string ModelSpec::to_json_string() const {
  json j;
  j["family"] = family_name(family);
  j["latent_dim"] = latent_dim;
  j["hidden"] = hidden;
  j["gen_channels"] = gen_channels;
  j["disc_channels"] = disc_channels;
  j["point_dim"] = point_dim;
  j["image_channels"] = image_channels;
  j["leaky_slope"] = leaky_slope;
  j["dropout"] = dropout;
  j["critic_batchnorm"] = critic_batchnorm;
  return j.dump();
}

ModelSpec ModelSpec::from_json_string(const std::string& s) {
  json j = json::parse(s);
  ModelSpec m;
  m.family = family_from_name(j.at("family").get<std::string>());
  m.latent_dim = j.value("latent_dim", 0);
  if (j.contains("hidden")) m.hidden = j["hidden"].get<std::vector<int>>();
  if (j.contains("gen_channels")) m.gen_channels = j["gen_channels"].get<std::vector<int>>();
  if (j.contains("disc_channels")) m.disc_channels = j["disc_channels"].get<std::vector<int>>();
  m.point_dim = j.value("point_dim", 2);
  m.image_channels = j.value("image_channels", 1);
  m.leaky_slope = j.value("leaky_slope", 0.2);
  m.dropout = j.value("dropout", 0.3);
  m.critic_batchnorm = j.value("critic_batchnorm", true);
  m.validate();
  return m;
}

std::vector<std::string> table_rows(Family f, const std::string& role) {
  const bool gen = role == "generator";
  switch (f) {
    case Family::mlp_gan:
      if (gen)
        return {"Dense", "LeakyReLU", "Dense", "LeakyReLU", "Dense", "LeakyReLU", "Dense", "Tanh"};
      return {"Dense", "LeakyReLU", "Dense", "LeakyReLU", "Dense", "LeakyReLU", "Dense", "Sigmoid"};
    case Family::mlp_wgan_gp:
      if (gen)
        return {"Dense", "LeakyReLU", "Dense", "LeakyReLU", "Dense", "LeakyReLU", "Dense", "Tanh"};
      return {"Dense", "LeakyReLU", "Dense", "LeakyReLU", "Dense", "LeakyReLU", "Dense"};
    case Family::dcgan:
      if (gen)
        return {"Dense", "LeakyReLU", "Reshape", "TransposedConv2D", "BatchNorm", "LeakyReLU",
                "TransposedConv2D", "BatchNorm", "LeakyReLU", "TransposedConv2D", "Tanh"};
      return {"Conv2D", "LeakyReLU", "Dropout", "Conv2D", "BatchNorm", "LeakyReLU", "Dropout",
              "Conv2D", "BatchNorm", "LeakyReLU", "Dropout", "Conv2D", "BatchNorm", "LeakyReLU",
              "Dropout", "Sigmoid"};
    case Family::conv_wgan_gp:
      if (gen)
        return {"Dense", "ReLU", "Reshape", "TransposedConv2D", "BatchNorm", "ReLU",
                "TransposedConv2D", "BatchNorm", "LeakyReLU", "TransposedConv2D", "Tanh"};
      return {"Conv2D", "LeakyReLU", "Dropout", "Conv2D", "BatchNorm", "LeakyReLU", "Dropout",
              "Conv2D", "BatchNorm", "LeakyReLU", "Dropout", "Conv2D", "BatchNorm", "LeakyReLU",
              "Dropout", "Dense"};
  }
  throw std::logic_error("table_rows: bad enum");
}

namespace {

template <typename T>
nn::Net<T> build_mlp(int64_t in, int64_t out, const std::vector<int>& hidden, double slope,
                     const char* head, Rng& rng) {
  nn::Net<T> net;
  int64_t cur = in;
  for (int h : hidden) {
    net.layers.push_back(std::make_unique<nn::Dense<T>>(cur, h, rng));
    net.layers.push_back(std::make_unique<nn::LeakyReLU<T>>(static_cast<T>(slope)));
    cur = h;
  }
  net.layers.push_back(std::make_unique<nn::Dense<T>>(cur, out, rng));
  if (std::string(head) == "tanh")
    net.layers.push_back(std::make_unique<nn::Tanh<T>>());
  else if (std::string(head) == "sigmoid")
    net.layers.push_back(std::make_unique<nn::Sigmoid<T>>());
  net.input_shape = {in};
  net.output_shape = {out};
  return net;
}

template <typename T>
std::unique_ptr<nn::Layer<T>> act_layer(bool leaky, double slope) {
  if (leaky) return std::make_unique<nn::LeakyReLU<T>>(static_cast<T>(slope));
  return std::make_unique<nn::ReLU<T>>();
}

template <typename T>
nn::Net<T> build_conv_generator(const ModelSpec& s, Rng& rng) {
  // 7x7 seed map, one stride-1 and two stride-2 transposed convolutions.
  const bool dc = s.family == Family::dcgan;
  const int64_t g0 = s.gen_channels[0], g1 = s.gen_channels[1], g2 = s.gen_channels[2];
  const int64_t latent = s.resolved_latent();
  nn::Net<T> net;
  net.layers.push_back(std::make_unique<nn::Dense<T>>(latent, 7 * 7 * g0, rng));
  net.layers.push_back(act_layer<T>(dc, s.leaky_slope));
  net.layers.push_back(std::make_unique<nn::Reshape<T>>(std::vector<int64_t>{g0, 7, 7}));
  net.layers.push_back(std::make_unique<nn::ConvTranspose2d<T>>(g0, g1, 3, 1, 1, rng));
  net.layers.push_back(std::make_unique<nn::BatchNorm2d<T>>(g1, rng));
  net.layers.push_back(act_layer<T>(dc, s.leaky_slope));
  net.layers.push_back(std::make_unique<nn::ConvTranspose2d<T>>(g1, g2, 4, 2, 1, rng));
  net.layers.push_back(std::make_unique<nn::BatchNorm2d<T>>(g2, rng));
  net.layers.push_back(std::make_unique<nn::LeakyReLU<T>>(static_cast<T>(s.leaky_slope)));
  net.layers.push_back(
      std::make_unique<nn::ConvTranspose2d<T>>(g2, s.image_channels, 4, 2, 1, rng));
  net.layers.push_back(std::make_unique<nn::Tanh<T>>());
  net.input_shape = {latent};
  net.output_shape = {s.image_channels, kImageSize, kImageSize};
  return net;
}

template <typename T>
nn::Net<T> build_conv_critic(const ModelSpec& s, Rng& rng) {
  // 28 -> 14 -> 7 -> 4 -> 4; the table ends in a scalar decision, so a
  // Flatten + Dense(1) head is appended after the four blocks.
  const bool dc = s.family == Family::dcgan;
  const bool bn = dc || s.critic_batchnorm;
  const int64_t d0 = s.disc_channels[0], d1 = s.disc_channels[1], d2 = s.disc_channels[2],
                d3 = s.disc_channels[3];
  const T slope = static_cast<T>(s.leaky_slope);
  const T drop = static_cast<T>(s.dropout);
  nn::Net<T> net;
  auto block = [&](int64_t ci, int64_t co, int64_t k, int64_t stride, bool with_bn) {
    net.layers.push_back(std::make_unique<nn::Conv2d<T>>(ci, co, k, stride, 1, rng));
    if (with_bn) net.layers.push_back(std::make_unique<nn::BatchNorm2d<T>>(co, rng));
    net.layers.push_back(std::make_unique<nn::LeakyReLU<T>>(slope));
    net.layers.push_back(std::make_unique<nn::Dropout<T>>(drop));
  };
  block(s.image_channels, d0, 4, 2, false);
  block(d0, d1, 4, 2, bn);
  block(d1, d2, 3, 2, bn);
  block(d2, d3, 3, 1, bn);
  net.layers.push_back(std::make_unique<nn::Flatten<T>>());
  net.layers.push_back(std::make_unique<nn::Dense<T>>(d3 * 4 * 4, 1, rng));
  if (dc) net.layers.push_back(std::make_unique<nn::Sigmoid<T>>());
  net.has_output_sigmoid = dc;
  net.input_shape = {s.image_channels, kImageSize, kImageSize};
  net.output_shape = {1};
  return net;
}

}  // namespace

template <typename T>
GanModel<T> build_model(const ModelSpec& spec, uint64_t init_seed) {
  spec.validate();
  Rng grng = Rng::child(init_seed, 1);
  Rng crng = Rng::child(init_seed, 2);
  GanModel<T> m;
  m.spec = spec;
  switch (spec.family) {
    case Family::mlp_gan:
    case Family::mlp_wgan_gp: {
      m.generator = build_mlp<T>(spec.resolved_latent(), spec.point_dim, spec.hidden,
                                 spec.leaky_slope, "tanh", grng);
      const bool sigmoid = spec.family == Family::mlp_gan;
      m.critic = build_mlp<T>(spec.point_dim, 1, spec.hidden, spec.leaky_slope,
                              sigmoid ? "sigmoid" : "none", crng);
      m.critic.has_output_sigmoid = sigmoid;
      break;
    }
    case Family::dcgan:
    case Family::conv_wgan_gp: {
      m.generator = build_conv_generator<T>(spec, grng);
      m.critic = build_conv_critic<T>(spec, crng);
      break;
    }
  }
  return m;
}

template GanModel<float> build_model<float>(const ModelSpec&, uint64_t);
template GanModel<double> build_model<double>(const ModelSpec&, uint64_t);

}  // namespace ganbench::gancore
