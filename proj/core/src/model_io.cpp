#include "chf/model_io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>

#include <json.hpp>

#include "chf/errors.hpp"

namespace chf {

namespace {

using nlohmann::json;

constexpr char kMagic[8] = {'C', 'H', 'F', 'M', 'D', 'L', '1', '\n'};

void write_u64_le(std::ostream& out, std::uint64_t v) {
  char bytes[8];
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(bytes, 8);
}

std::uint64_t read_u64_le(std::istream& in) {
  unsigned char bytes[8];
  in.read(reinterpret_cast<char*>(bytes), 8);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
  return v;
}

void write_f64_le(std::ostream& out, const std::vector<double>& values) {
  for (double d : values) {
    write_u64_le(out, std::bit_cast<std::uint64_t>(d));
  }
}

std::vector<double> read_f64_le(std::istream& in, std::size_t count) {
  std::vector<double> values(count);
  for (std::size_t i = 0; i < count; ++i) {
    values[i] = std::bit_cast<double>(read_u64_le(in));
  }
  return values;
}

json layer_to_json(const LayerSpec& spec) {
  json j;
  j["kind"] = to_string(spec.kind);
  switch (spec.kind) {
    case LayerKind::conv1d:
      j["in_channels"] = spec.in_channels;
      j["out_channels"] = spec.out_channels;
      j["kernel_size"] = spec.kernel_size;
      j["padding"] = "same";
      break;
    case LayerKind::dense:
      j["in_features"] = spec.in_features;
      j["out_features"] = spec.out_features;
      break;
    case LayerKind::activation:
      j["function"] = to_string(spec.fn);
      break;
    case LayerKind::flatten:
      break;
  }
  return j;
}

LayerSpec layer_from_json(const json& j) {
  const LayerKind kind = layer_kind_from_string(j.at("kind"));
  switch (kind) {
    case LayerKind::conv1d:
      return LayerSpec::conv1d(j.at("in_channels"), j.at("out_channels"),
                               j.at("kernel_size"));
    case LayerKind::dense:
      return LayerSpec::dense(j.at("in_features"), j.at("out_features"));
    case LayerKind::activation:
      return LayerSpec::activation(
          activation_from_string(j.at("function")));
    case LayerKind::flatten:
      return LayerSpec::flatten();
  }
  throw ValidationError("unknown layer kind in model file");
}

json network_to_json(const NetworkModel& net) {
  json j;
  j["input_shape"] = net.input_shape();
  j["seed"] = net.rng_seed();
  json layers = json::array();
  for (const LayerSpec& spec : net.layers()) layers.push_back(layer_to_json(spec));
  j["layers"] = layers;
  return j;
}

NetworkModel network_from_json(const json& j) {
  std::vector<LayerSpec> layers;
  for (const json& lj : j.at("layers")) layers.push_back(layer_from_json(lj));
  std::vector<std::size_t> input_shape =
      j.at("input_shape").get<std::vector<std::size_t>>();
  return NetworkModel(std::move(layers), std::move(input_shape),
                      j.at("seed").get<std::uint64_t>());
}

json train_config_to_json(const TrainConfig& cfg) {
  return json{{"batch_size", cfg.batch_size},
              {"epochs", cfg.epochs},
              {"learning_rate", cfg.learning_rate},
              {"beta1", cfg.beta1},
              {"beta2", cfg.beta2},
              {"epsilon", cfg.epsilon},
              {"seed", cfg.seed}};
}

TrainConfig train_config_from_json(const json& j) {
  TrainConfig cfg;
  cfg.batch_size = j.at("batch_size");
  cfg.epochs = j.at("epochs");
  cfg.learning_rate = j.at("learning_rate");
  cfg.beta1 = j.at("beta1");
  cfg.beta2 = j.at("beta2");
  cfg.epsilon = j.at("epsilon");
  cfg.seed = j.at("seed").get<std::uint64_t>();
  return cfg;
}

json autoencoder_to_json(const Autoencoder& ae) {
  json j;
  j["spec"] = {{"input_dim", ae.spec().input_dim},
               {"hidden_dim", ae.spec().hidden_dim},
               {"latent_dim", ae.spec().latent_dim}};
  j["network"] = network_to_json(ae.net());
  return j;
}

Autoencoder autoencoder_from_json(const json& j) {
  const json& s = j.at("spec");
  AutoencoderSpec spec{s.at("input_dim"), s.at("hidden_dim"),
                       s.at("latent_dim")};
  return Autoencoder(spec, network_from_json(j.at("network")));
}

void write_container(const std::string& path, const json& header,
                     const std::vector<double>& blob) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw ValidationError("cannot write model file: " + path);
  }
  const std::string header_text = header.dump();
  out.write(kMagic, sizeof(kMagic));
  write_u64_le(out, header_text.size());
  out.write(header_text.data(),
            static_cast<std::streamsize>(header_text.size()));
  write_f64_le(out, blob);
  if (!out) {
    throw ValidationError("failed writing model file: " + path);
  }
}

json read_container(const std::string& path, std::ifstream& in) {
  in.open(path, std::ios::binary);
  if (!in) {
    throw ValidationError("cannot open model file: " + path);
  }
  char magic[8];
  in.read(magic, 8);
  if (!in || std::memcmp(magic, kMagic, 8) != 0) {
    throw ValidationError("not a chf model file: " + path);
  }
  const std::uint64_t header_len = read_u64_le(in);
  std::string header_text(header_len, '\0');
  in.read(header_text.data(), static_cast<std::streamsize>(header_len));
  if (!in) {
    throw ValidationError("truncated model header: " + path);
  }
  return json::parse(header_text);
}

}  // namespace

void save_model(const ModelBundle& bundle, const std::string& path) {
  json header;
  header["format"] = "chf-model";
  header["version"] = 1;
  header["kind"] = "dcnn";
  header["name"] = bundle.name;
  header["network"] = network_to_json(bundle.net);
  header["train_config"] = train_config_to_json(bundle.train_config);

  json preprocess;
  preprocess["feature_names"] = bundle.base_feature_names;
  preprocess["standardizer"] = {{"means", bundle.standardizer.means()},
                                {"stds", bundle.standardizer.stds()}};
  if (bundle.autoencoder) {
    preprocess["autoencoder"] = autoencoder_to_json(*bundle.autoencoder);
  } else {
    preprocess["autoencoder"] = nullptr;
  }
  if (bundle.augment_standardizer) {
    preprocess["augment_standardizer"] = {
        {"means", bundle.augment_standardizer->means()},
        {"stds", bundle.augment_standardizer->stds()}};
  } else {
    preprocess["augment_standardizer"] = nullptr;
  }
  header["preprocess"] = preprocess;

  std::vector<double> blob;
  if (bundle.autoencoder) {
    blob = bundle.autoencoder->net().flat_parameters();
  }
  const std::vector<double> net_params = bundle.net.flat_parameters();
  blob.insert(blob.end(), net_params.begin(), net_params.end());
  write_container(path, header, blob);
}

ModelBundle load_model(const std::string& path) {
  std::ifstream in;
  const json header = read_container(path, in);
  if (header.at("kind") != "dcnn") {
    throw ValidationError(path + " is not a regressor bundle (kind=" +
                          header.at("kind").get<std::string>() + ")");
  }

  NetworkModel net = network_from_json(header.at("network"));
  const json& preprocess = header.at("preprocess");
  Standardizer standardizer(
      preprocess.at("standardizer").at("means").get<std::vector<double>>(),
      preprocess.at("standardizer").at("stds").get<std::vector<double>>());

  std::optional<Autoencoder> ae;
  if (!preprocess.at("autoencoder").is_null()) {
    ae = autoencoder_from_json(preprocess.at("autoencoder"));
  }
  std::optional<Standardizer> aug_std;
  if (!preprocess.at("augment_standardizer").is_null()) {
    const json& a = preprocess.at("augment_standardizer");
    aug_std = Standardizer(a.at("means").get<std::vector<double>>(),
                           a.at("stds").get<std::vector<double>>());
  }

  const std::size_t ae_count = ae ? ae->net().parameter_count() : 0;
  std::vector<double> blob =
      read_f64_le(in, ae_count + net.parameter_count());
  if (!in) {
    throw ValidationError("truncated parameter blob: " + path);
  }
  if (ae) {
    ae->net().set_flat_parameters(
        std::vector<double>(blob.begin(), blob.begin() + ae_count));
  }
  net.set_flat_parameters(
      std::vector<double>(blob.begin() + ae_count, blob.end()));

  return ModelBundle{header.at("name"),
                     std::move(net),
                     std::move(standardizer),
                     std::move(ae),
                     std::move(aug_std),
                     preprocess.at("feature_names")
                         .get<std::vector<std::string>>(),
                     train_config_from_json(header.at("train_config"))};
}

void save_autoencoder(const Autoencoder& ae, const TrainConfig& cfg,
                      const std::string& path) {
  json header;
  header["format"] = "chf-model";
  header["version"] = 1;
  header["kind"] = "autoencoder";
  header["name"] = "autoencoder_k" + std::to_string(ae.latent_dim());
  header["autoencoder"] = autoencoder_to_json(ae);
  header["train_config"] = train_config_to_json(cfg);
  write_container(path, header, ae.net().flat_parameters());
}

Autoencoder load_autoencoder(const std::string& path) {
  std::ifstream in;
  const json header = read_container(path, in);
  if (header.at("kind") != "autoencoder") {
    throw ValidationError(path + " is not an autoencoder file");
  }
  Autoencoder ae = autoencoder_from_json(header.at("autoencoder"));
  std::vector<double> blob = read_f64_le(in, ae.net().parameter_count());
  if (!in) {
    throw ValidationError("truncated parameter blob: " + path);
  }
  ae.net().set_flat_parameters(blob);
  return ae;
}

}  // namespace chf
