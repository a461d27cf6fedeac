#include "train_config.hpp"

#include <functional>
#include <map>
#include <stdexcept>
#include <string>

#include <json.hpp>

namespace jointparse::cli {

namespace {

using Json = nlohmann::json;
using Setter = std::function<void(const Json&)>;

double number(const Json& value, const std::string& key) {
  if (!value.is_number()) throw std::invalid_argument("config key " + key + " must be a number");
  return value.get<double>();
}

int integer(const Json& value, const std::string& key) {
  if (!value.is_number_integer()) throw std::invalid_argument("config key " + key + " must be an integer");
  return value.get<int>();
}

void apply_section(const Json& root, const std::string& section, const std::map<std::string, Setter>& setters) {
  if (!root.contains(section)) return;
  const Json& body = root.at(section);
  if (!body.is_object()) throw std::invalid_argument("config section " + section + " must be an object");
  for (const auto& [key, value] : body.items()) {
    auto it = setters.find(key);
    if (it == setters.end()) throw std::invalid_argument("unknown config key " + section + "." + key);
    it->second(value);
  }
}

}  // namespace

TrainMode parse_mode(std::string_view text) {
  if (text == "end2end") return TrainMode::EndToEnd;
  if (text == "goldedu") return TrainMode::GoldEdu;
  throw std::invalid_argument("mode must be end2end or goldedu, got " + std::string(text));
}

TrainConfig parse_train_config(std::string_view json_text) {
  Json root;
  try {
    root = Json::parse(json_text);
  } catch (const Json::parse_error& e) {
    throw std::invalid_argument(std::string("config is not valid JSON: ") + e.what());
  }
  if (!root.is_object()) throw std::invalid_argument("config must be a JSON object");
  for (const auto& [key, value] : root.items()) {
    if (key != "data" && key != "model" && key != "train" && key != "eval") {
      throw std::invalid_argument("unknown config section " + key);
    }
  }

  TrainConfig config;
  apply_section(root, "data",
                {{"dev_size", [&](const Json& v) { config.dev_size = integer(v, "data.dev_size"); }},
                 {"unk_replace", [&](const Json& v) { config.unk_replace = number(v, "data.unk_replace"); }}});
  apply_section(root, "model",
                {{"word_dim", [&](const Json& v) { config.dims.word_dim = integer(v, "model.word_dim"); }},
                 {"hidden_dim", [&](const Json& v) { config.dims.hidden_dim = integer(v, "model.hidden_dim"); }},
                 {"mlp_dim", [&](const Json& v) { config.dims.mlp_dim = integer(v, "model.mlp_dim"); }}});
  apply_section(
      root, "train",
      {{"epochs", [&](const Json& v) { config.epochs = integer(v, "train.epochs"); }},
       {"beta", [&](const Json& v) { config.beta = number(v, "train.beta"); }},
       {"dropout", [&](const Json& v) { config.dropout = number(v, "train.dropout"); }},
       {"seed",
        [&](const Json& v) {
          if (!v.is_number_unsigned()) throw std::invalid_argument("config key train.seed must be a non-negative integer");
          config.seed = v.get<std::uint64_t>();
        }},
       {"learning_rate", [&](const Json& v) { config.optimizer.learning_rate = number(v, "train.learning_rate"); }},
       {"clip_norm", [&](const Json& v) { config.optimizer.clip_norm = number(v, "train.clip_norm"); }},
       {"adam_beta1", [&](const Json& v) { config.optimizer.beta1 = number(v, "train.adam_beta1"); }},
       {"adam_beta2", [&](const Json& v) { config.optimizer.beta2 = number(v, "train.adam_beta2"); }}});
  apply_section(root, "eval", {{"mode", [&](const Json& v) {
                                  if (!v.is_string()) throw std::invalid_argument("config key eval.mode must be a string");
                                  config.mode = parse_mode(v.get<std::string>());
                                }}});
  return config;
}

}  // namespace jointparse::cli
