#include "tcssl/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <cmath>
#include <sstream>

#include "tcssl/errors.hpp"

namespace tcssl {

namespace {

const std::map<std::string, std::string>& desk_defaults() {
  static const std::map<std::string, std::string> d = {
      {"synth.num_phases", "7"},
      {"synth.feature_dim", "16"},
      {"synth.min_phase_frames", "60"},
      {"synth.max_phase_frames", "300"},
      {"synth.prototype_scale", "2.0"},
      {"synth.drift_step", "0.02"},
      {"synth.noise_std", "2.0"},
      {"synth.fps", "2"},
      {"synth.skip_probability", "0.1"},
      {"model.hidden", "64"},
      {"model.embedding_dim", "32"},
      {"model.lstm_hidden", "64"},
      {"model.num_phases", "7"},
      {"pretrain.epochs", "25"},
      {"pretrain.batch_size", "64"},
      {"pretrain.learning_rate", "1e-4"},
      {"pretrain.delta_seconds", "30"},
      {"pretrain.delta_seconds_second_order", "15"},
      {"pretrain.gamma_seconds", "120"},
      {"pretrain.tuples_per_video", "250"},
      {"pretrain.margin_contrastive", "2"},
      {"pretrain.margin_ranking", "2"},
      {"pretrain.second_order_weight", "0.5"},
      {"finetune.batch_frames", "128"},
      {"finetune.accumulate_batches", "3"},
      {"finetune.stop_train_accuracy", "0.999"},
      {"finetune.max_epochs", "100"},
      {"finetune.learning_rate", "1e-3"},
      {"finetune.sample_rate_hz", "1"},
      {"finetune.frozen_encoder_layers", "1"},
      {"adam.beta1", "0.9"},
      {"adam.beta2", "0.999"},
      {"adam.epsilon", "1e-8"},
  };
  return d;
}

}  // namespace

Config Config::preset(std::string_view name) {
  Config c;
  c.values_ = desk_defaults();
  if (name == "desk") {
    c.preset_ = "desk";
  } else if (name == "paper") {
    c.preset_ = "paper";
    c.values_["model.hidden"] = "2048";
    c.values_["model.embedding_dim"] = "4096";
    c.values_["model.lstm_hidden"] = "512";
    c.values_["finetune.learning_rate"] = "1e-4";
  } else {
    throw ConfigError("unknown preset '" + std::string(name) + "' (expected desk or paper)");
  }
  return c;
}

void Config::set(const std::string& key, const std::string& value) {
  auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("unknown config key '" + key + "'");
  it->second = value;
}

void Config::set_assignment(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw ConfigError("expected key=value, got '" + assignment + "'");
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t");
    const auto e = s.find_last_not_of(" \t");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  };
  set(trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

void Config::load_file(const std::filesystem::path& path) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::read_ini(path.string(), tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(std::string("config file: ") + e.what());
  }
  for (const auto& [section, node] : tree) {
    if (node.empty()) throw ConfigError("config key '" + section + "' must be inside a [section]");
    for (const auto& [key, leaf] : node) set(section + "." + key, leaf.get_value<std::string>());
  }
}

const std::string& Config::get(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("unknown config key '" + key + "'");
  return it->second;
}

double Config::get_double(const std::string& key) const {
  const std::string& s = get(key);
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size() || !std::isfinite(v)) throw std::invalid_argument(s);
    return v;
  } catch (const std::logic_error&) {
    throw ConfigError(key + ": expected a number, got '" + s + "'");
  }
}

std::size_t Config::get_size(const std::string& key) const {
  const std::string& s = get(key);
  try {
    std::size_t pos = 0;
    const long long v = std::stoll(s, &pos);
    if (pos != s.size() || v < 0) throw std::invalid_argument(s);
    return static_cast<std::size_t>(v);
  } catch (const std::logic_error&) {
    throw ConfigError(key + ": expected a nonnegative integer, got '" + s + "'");
  }
}

std::vector<std::size_t> Config::get_sizes(const std::string& key) const {
  std::vector<std::size_t> out;
  std::stringstream ss(get(key));
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    try {
      out.push_back(static_cast<std::size_t>(std::stoul(item)));
    } catch (const std::logic_error&) {
      throw ConfigError(key + ": expected a comma-separated list of integers");
    }
  }
  return out;
}

std::string Config::to_ini() const {
  std::string out;
  std::string current;
  for (const auto& [key, value] : values_) {
    const auto dot = key.find('.');
    const std::string section = key.substr(0, dot);
    if (section != current) {
      out += (out.empty() ? "[" : "\n[") + section + "]\n";
      current = section;
    }
    out += key.substr(dot + 1) + " = " + value + "\n";
  }
  return out;
}

SynthConfig synth_config(const Config& cfg) {
  SynthConfig s;
  s.num_phases = cfg.get_size("synth.num_phases");
  s.feature_dim = cfg.get_size("synth.feature_dim");
  s.min_phase_frames = cfg.get_size("synth.min_phase_frames");
  s.max_phase_frames = cfg.get_size("synth.max_phase_frames");
  s.prototype_scale = cfg.get_double("synth.prototype_scale");
  s.drift_step = cfg.get_double("synth.drift_step");
  s.noise_std = cfg.get_double("synth.noise_std");
  s.fps = cfg.get_double("synth.fps");
  s.skip_probability = cfg.get_double("synth.skip_probability");
  s.validate();
  return s;
}

EncoderArch encoder_arch(const Config& cfg, std::size_t input_dim) {
  return {input_dim, cfg.get_sizes("model.hidden"), cfg.get_size("model.embedding_dim")};
}

PhaseArch phase_arch(const Config& cfg, std::size_t input_dim) {
  return {encoder_arch(cfg, input_dim), cfg.get_size("model.lstm_hidden"), cfg.get_size("model.num_phases")};
}

AdamConfig adam_config(const Config& cfg, const std::string& section) {
  AdamConfig a;
  a.learning_rate = cfg.get_double(section + ".learning_rate");
  a.beta1 = cfg.get_double("adam.beta1");
  a.beta2 = cfg.get_double("adam.beta2");
  a.epsilon = cfg.get_double("adam.epsilon");
  a.validate();
  return a;
}

double resolved_delta_seconds(const Config& cfg, PretrainMethod method) {
  return method == PretrainMethod::contrastive2 ? cfg.get_double("pretrain.delta_seconds_second_order")
                                                : cfg.get_double("pretrain.delta_seconds");
}

PretrainConfig pretrain_config(const Config& cfg, PretrainMethod method, double fps) {
  PretrainConfig p;
  p.method = method;
  p.epochs = cfg.get_size("pretrain.epochs");
  p.batch_size = cfg.get_size("pretrain.batch_size");
  p.sampler.delta_seconds = resolved_delta_seconds(cfg, method);
  p.sampler.gamma_seconds = cfg.get_double("pretrain.gamma_seconds");
  p.sampler.frames_per_second = fps;
  p.sampler.tuples_per_video = cfg.get_size("pretrain.tuples_per_video");
  p.loss.margin_contrastive = cfg.get_double("pretrain.margin_contrastive");
  p.loss.margin_ranking = cfg.get_double("pretrain.margin_ranking");
  p.loss.second_order_weight = cfg.get_double("pretrain.second_order_weight");
  p.adam = adam_config(cfg, "pretrain");
  p.validate();
  return p;
}

FinetuneConfig finetune_config(const Config& cfg) {
  FinetuneConfig f;
  f.batch_frames = cfg.get_size("finetune.batch_frames");
  f.accumulate_batches = cfg.get_size("finetune.accumulate_batches");
  f.stop_train_accuracy = cfg.get_double("finetune.stop_train_accuracy");
  f.max_epochs = cfg.get_size("finetune.max_epochs");
  f.adam = adam_config(cfg, "finetune");
  f.validate();
  return f;
}

std::size_t finetune_stride(const Config& cfg, double fps) {
  const double rate = cfg.get_double("finetune.sample_rate_hz");
  if (!(rate > 0.0)) throw ConfigError("finetune.sample_rate_hz must be positive");
  const long long stride = std::llround(fps / rate);
  return stride < 1 ? 1 : static_cast<std::size_t>(stride);
}

}  // namespace tcssl
