#include "tcssl/synthetic.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <string>

#include "json.hpp"
#include "tcssl/errors.hpp"

namespace tcssl {

void SynthConfig::validate() const {
  if (num_phases < 2) throw ConfigError("synthetic data needs at least two phases");
  if (feature_dim == 0) throw ConfigError("feature_dim must be positive");
  if (min_phase_frames == 0 || max_phase_frames < min_phase_frames)
    throw ConfigError("phase duration range must be positive and ordered");
  if (!(prototype_scale >= 0.0) || !(drift_step >= 0.0) || !(noise_std >= 0.0))
    throw ConfigError("synthetic scales must be nonnegative");
  if (!(fps > 0.0)) throw ConfigError("fps must be positive");
  if (!(skip_probability >= 0.0 && skip_probability < 1.0)) throw ConfigError("skip_probability must lie in [0, 1)");
}

PhasePrototypes draw_prototypes(const SynthConfig& cfg, Rng& rng) {
  cfg.validate();
  PhasePrototypes p{Matrix(cfg.num_phases, cfg.feature_dim)};
  for (double& v : p.values.data) v = cfg.prototype_scale * rng.normal();
  return p;
}

FrameSequence generate_procedure(const SynthConfig& cfg, const PhasePrototypes& prototypes, Rng& rng,
                                 std::string video_id) {
  cfg.validate();
  if (prototypes.values.rows != cfg.num_phases || prototypes.values.cols != cfg.feature_dim)
    throw ContractError("prototype table does not match the synthetic config");

  std::vector<std::size_t> kept;
  do {
    kept.clear();
    for (std::size_t k = 0; k < cfg.num_phases; ++k)
      if (!rng.bernoulli(cfg.skip_probability)) kept.push_back(k);
  } while (kept.size() < 2);

  FrameSequence seq;
  seq.video_id = std::move(video_id);
  seq.fps = cfg.fps;
  seq.feature_dim = cfg.feature_dim;
  seq.labels.emplace();
  const std::size_t n = cfg.feature_dim;
  std::vector<double> drift(n, 0.0);
  for (std::size_t phase : kept) {
    const auto duration = static_cast<std::size_t>(rng.uniform_int(
        static_cast<std::int64_t>(cfg.min_phase_frames), static_cast<std::int64_t>(cfg.max_phase_frames)));
    const auto proto = prototypes.values.row(phase);
    for (std::size_t t = 0; t < duration; ++t) {
      for (std::size_t i = 0; i < n; ++i) {
        drift[i] += cfg.drift_step * rng.normal();
        const double noise = cfg.noise_std * rng.normal();
        seq.features.push_back(static_cast<float>(proto[i] + drift[i] + noise));
      }
      seq.labels->push_back(static_cast<int>(phase));
    }
  }
  return seq;
}

std::vector<FrameSequence> Dataset::select(std::string_view splits) const {
  std::vector<FrameSequence> out;
  for (std::size_t i = 0; i < videos.size(); ++i)
    if (splits.find(static_cast<char>(manifest.videos[i].split)) != std::string_view::npos) out.push_back(videos[i]);
  return out;
}

std::vector<Split> assign_splits(const std::vector<std::size_t>& lengths) {
  std::vector<std::size_t> order(lengths.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return lengths[a] < lengths[b]; });
  constexpr Split sets[] = {Split::A, Split::B, Split::C, Split::D};
  std::vector<Split> out(lengths.size());
  for (std::size_t rank = 0; rank < order.size(); ++rank) out[order[rank]] = sets[rank % 4];
  return out;
}

Dataset generate_dataset(const SynthConfig& cfg, std::size_t n_videos, Rng& rng) {
  cfg.validate();
  if (n_videos < 4) throw ConfigError("a four-way split needs at least 4 videos, got " + std::to_string(n_videos));
  const PhasePrototypes prototypes = draw_prototypes(cfg, rng);
  const std::uint64_t video_seed = rng.next_u64();

  Dataset ds;
  std::vector<std::size_t> lengths;
  for (std::size_t v = 0; v < n_videos; ++v) {
    Rng stream(mix_seed(video_seed, v));
    char id[32];
    std::snprintf(id, sizeof(id), "video_%03zu", v);
    ds.videos.push_back(generate_procedure(cfg, prototypes, stream, id));
    lengths.push_back(ds.videos.back().frames());
  }
  const auto splits = assign_splits(lengths);
  for (std::size_t v = 0; v < n_videos; ++v) {
    const auto& seq = ds.videos[v];
    ds.manifest.videos.push_back({seq.video_id, seq.frames(), seq.fps, seq.feature_dim, true, splits[v]});
  }
  nlohmann::ordered_json prov;
  prov["generator"] = "synthetic_procedures";
  prov["seed"] = rng.seed();
  prov["num_phases"] = cfg.num_phases;
  prov["feature_dim"] = cfg.feature_dim;
  prov["min_phase_frames"] = cfg.min_phase_frames;
  prov["max_phase_frames"] = cfg.max_phase_frames;
  prov["prototype_scale"] = cfg.prototype_scale;
  prov["drift_step"] = cfg.drift_step;
  prov["noise_std"] = cfg.noise_std;
  prov["fps"] = cfg.fps;
  prov["skip_probability"] = cfg.skip_probability;
  ds.manifest.provenance = prov.dump();
  return ds;
}

}  // namespace tcssl
