#pragma once

// Flat "key = value" configuration with [section] headers. Every key is
// addressed as "section.key"; see README.md for the full list.

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "tcssl/phase_model.hpp"
#include "tcssl/synthetic.hpp"
#include "tcssl/trainers.hpp"

namespace tcssl {

class Config {
 public:
  /// "desk" (small models for CPU runs) or "paper" (full-size widths).
  static Config preset(std::string_view name);

  /// Overlays values from an ini-style file. Unknown keys are rejected.
  void load_file(const std::filesystem::path& path);
  /// Overlays one value; `key` must be a known "section.key".
  void set(const std::string& key, const std::string& value);
  /// Overlays "section.key=value".
  void set_assignment(const std::string& assignment);

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  const std::string& get(const std::string& key) const;
  double get_double(const std::string& key) const;
  std::size_t get_size(const std::string& key) const;
  std::vector<std::size_t> get_sizes(const std::string& key) const;

  const std::map<std::string, std::string>& values() const { return values_; }
  const std::string& preset_name() const { return preset_; }

  /// Renders the config back as an ini file.
  std::string to_ini() const;

 private:
  std::string preset_;
  std::map<std::string, std::string> values_;
};

SynthConfig synth_config(const Config& cfg);
EncoderArch encoder_arch(const Config& cfg, std::size_t input_dim);
PhaseArch phase_arch(const Config& cfg, std::size_t input_dim);
AdamConfig adam_config(const Config& cfg, const std::string& section);

/// Near-offset bound for a method: contrastive2 uses
/// pretrain.delta_seconds_second_order, the others pretrain.delta_seconds.
double resolved_delta_seconds(const Config& cfg, PretrainMethod method);
PretrainConfig pretrain_config(const Config& cfg, PretrainMethod method, double fps);
FinetuneConfig finetune_config(const Config& cfg);

/// Frame stride that brings `fps` down to finetune.sample_rate_hz.
std::size_t finetune_stride(const Config& cfg, double fps);

}  // namespace tcssl
