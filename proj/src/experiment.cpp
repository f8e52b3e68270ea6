#include "tcssl/experiment.hpp"

#include <atomic>
#include <exception>
#include <mutex>
#include <thread>

#include "tcssl/errors.hpp"

namespace tcssl {

Rng stream_for(std::uint64_t seed, Stream stream) {
  return Rng(seed).derive(static_cast<std::uint64_t>(stream));
}

std::vector<FrameSequence> videos_of(const Dataset& dataset, std::string_view splits) {
  auto out = dataset.select(splits);
  if (out.empty()) throw DataError("no videos in split(s) " + std::string(splits));
  return out;
}

std::vector<FrameSequence> phase_videos_of(const Dataset& dataset, std::string_view splits, const Config& cfg) {
  auto videos = videos_of(dataset, splits);
  for (auto& v : videos) v = subsample(v, finetune_stride(cfg, v.fps));
  return videos;
}

double common_fps(std::span<const FrameSequence> videos) {
  if (videos.empty()) throw DataError("no videos");
  const double fps = videos.front().fps;
  for (const auto& v : videos)
    if (v.fps != fps) throw DataError(v.video_id + ": frame rate differs from " + videos.front().video_id);
  return fps;
}

Encoder initial_encoder(const Config& cfg, std::size_t input_dim, std::uint64_t seed) {
  Encoder enc(encoder_arch(cfg, input_dim));
  Rng rng = stream_for(seed, Stream::encoder_init);
  init_uniform_fan(enc.parameters(), rng);
  return enc;
}

PretrainResult run_pretrain(Encoder& encoder, const Config& cfg, PretrainMethod method,
                            std::span<const FrameSequence> unlabeled, std::uint64_t seed) {
  const PretrainConfig pc = pretrain_config(cfg, method, common_fps(unlabeled));
  Rng rng = stream_for(seed, Stream::pretrain);
  return pretrain(encoder, unlabeled, pc, rng);
}

PhaseModel assemble_phase_model(const Config& cfg, Encoder encoder, std::uint64_t seed) {
  PhaseModel model(std::move(encoder), cfg.get_size("model.lstm_hidden"), cfg.get_size("model.num_phases"));
  Rng rng = stream_for(seed, Stream::head_init);
  init_uniform_fan(model.head_parameters(), rng);
  const std::size_t frozen = cfg.get_size("finetune.frozen_encoder_layers");
  if (frozen > model.encoder().num_layers())
    throw ConfigError("finetune.frozen_encoder_layers exceeds the encoder depth");
  const ParamRefs params = model.parameters();
  for (std::size_t l = 0; l < model.encoder().num_layers(); ++l)
    set_layer_trainable(params, "encoder." + std::to_string(l), l >= frozen);
  return model;
}

FinetuneResult run_finetune(PhaseModel& model, const Config& cfg, std::span<const FrameSequence> labeled,
                            std::uint64_t seed) {
  Rng rng = stream_for(seed, Stream::finetune);
  return finetune(model, labeled, finetune_config(cfg), rng);
}

const CompareRun& CompareResult::run(std::uint64_t seed, const std::string& arm) const {
  for (const auto& r : runs)
    if (r.seed == seed && r.arm == arm) return r;
  throw ContractError("no run for seed " + std::to_string(seed) + " arm " + arm);
}

CompareResult run_compare(const Dataset& dataset, const Config& cfg, const CompareOptions& options) {
  if (options.seeds.empty()) throw ConfigError("compare needs at least one seed");
  const auto unlabeled = videos_of(dataset, options.pretrain_sets);
  const auto labeled = phase_videos_of(dataset, options.labeled_sets, cfg);
  const auto test = phase_videos_of(dataset, options.test_split, cfg);
  const std::size_t input_dim = unlabeled.front().feature_dim;

  CompareResult result;
  result.seeds = options.seeds;
  result.arms.push_back("none");
  for (auto m : options.methods) result.arms.emplace_back(to_string(m));
  const std::size_t n_arms = result.arms.size();
  result.runs.resize(options.seeds.size() * n_arms);

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t task; (task = next++) < result.runs.size();) {
      try {
        const std::uint64_t seed = options.seeds[task / n_arms];
        const std::size_t arm = task % n_arms;
        CompareRun run;
        run.seed = seed;
        run.arm = result.arms[arm];
        Encoder encoder = initial_encoder(cfg, input_dim, seed);
        if (arm > 0)
          run.pretrain_loss = run_pretrain(encoder, cfg, options.methods[arm - 1], unlabeled, seed).epoch_loss;
        PhaseModel model = assemble_phase_model(cfg, std::move(encoder), seed);
        const FinetuneResult ft = run_finetune(model, cfg, labeled, seed);
        run.finetune_epochs = ft.log.size();
        run.reached_stop = ft.reached_stop;
        run.final_train_accuracy = ft.log.empty() ? 0.0 : ft.log.back().train_accuracy;
        run.report = evaluate(model, test).report;
        result.runs[task] = std::move(run);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = result.runs.size();
      }
    }
  };
  const std::size_t n_threads = std::max<std::size_t>(1, std::min(options.threads, result.runs.size()));
  std::vector<std::thread> pool;
  for (std::size_t i = 1; i < n_threads; ++i) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
  return result;
}

std::string RunManifest::encode() const {
  nlohmann::ordered_json j;
  j["version"] = kArtifactVersion;
  j["command"] = command;
  j["args"] = args;
  j["preset"] = preset;
  j["config"] = config;
  j["resolved"] = resolved;
  j["outputs"] = outputs;
  j["duration_seconds"] = duration_seconds;
  return j.dump(2) + "\n";
}

RunManifest RunManifest::decode(const std::string& text) {
  RunManifest m;
  try {
    const auto j = nlohmann::ordered_json::parse(text);
    m.command = j.at("command").get<std::string>();
    m.args = j.at("args");
    m.preset = j.at("preset").get<std::string>();
    m.config = j.at("config").get<std::map<std::string, std::string>>();
    m.resolved = j.value("resolved", nlohmann::ordered_json::object());
    m.outputs = j.value("outputs", nlohmann::ordered_json::array());
    m.duration_seconds = j.value("duration_seconds", 0.0);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("run manifest: ") + e.what());
  }
  return m;
}

}  // namespace tcssl
