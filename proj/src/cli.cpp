#include "tcssl/cli.hpp"

#include <CLI11.hpp>
#include <chrono>
#include <cstdio>
#include <stdexcept>

#include "tcssl/dataset_io.hpp"
#include "tcssl/errors.hpp"
#include "tcssl/report.hpp"
#include "tcssl/retrieval.hpp"

namespace tcssl {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Options shared by every working subcommand.
struct CommonOptions {
  std::string preset = "desk";
  std::string config_file;
  std::vector<std::string> overrides;
};

void add_common(CLI::App* sub, CommonOptions& c) {
  sub->add_option("--preset", c.preset, "Built-in defaults: desk or paper")->capture_default_str();
  sub->add_option("--config", c.config_file, "ini-style config file overlaid on the preset");
  sub->add_option("--set", c.overrides, "section.key=value override (repeatable)");
}

Config resolve_config(const CommonOptions& c) {
  Config cfg = Config::preset(c.preset);
  if (!c.config_file.empty()) {
    if (!fs::exists(c.config_file)) throw UsageError("config file not found: " + c.config_file);
    cfg.load_file(c.config_file);
  }
  for (const auto& s : c.overrides) cfg.set_assignment(s);
  return cfg;
}

// One command invocation: its arguments (everything needed to replay it),
// the resolved config, and what it produced.
struct Run {
  std::string command;
  json args = json::object();
  Config cfg;
  json resolved = json::object();
  std::vector<fs::path> outputs;
  std::ostream* out = nullptr;

  std::string str(const char* key) const { return args.at(key).get<std::string>(); }
  std::uint64_t seed() const { return args.at("seed").get<std::uint64_t>(); }

  void write(const fs::path& path, const std::string& bytes) {
    write_file_atomic(path, bytes);
    outputs.push_back(path);
  }
};

json adam_json(const AdamConfig& a) {
  return {{"learning_rate", a.learning_rate}, {"beta1", a.beta1}, {"beta2", a.beta2}, {"epsilon", a.epsilon}};
}

json sampler_json(const SamplerConfig& s) {
  return {{"delta_seconds", s.delta_seconds},       {"gamma_seconds", s.gamma_seconds},
          {"frames_per_second", s.frames_per_second}, {"delta_frames", s.delta_frames()},
          {"gamma_frames", s.gamma_frames()},         {"tuples_per_video", s.tuples_per_video}};
}

json finetune_json(const FinetuneConfig& f, std::size_t stride) {
  return {{"batch_frames", f.batch_frames},
          {"accumulate_batches", f.accumulate_batches},
          {"stop_train_accuracy", f.stop_train_accuracy},
          {"stop_accuracy_source", "predictions collected during the epoch"},
          {"max_epochs", f.max_epochs},
          {"frame_stride", stride},
          {"adam", adam_json(f.adam)}};
}

void check_sets(const std::string& sets) {
  if (sets != "A" && sets != "AB" && sets != "ABC")
    throw UsageError("--labeled-sets must be A, AB or ABC, got '" + sets + "'");
}

PretrainMethod method_arg(const std::string& name) {
  try {
    return parse_pretrain_method(name);
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// ---------------------------------------------------------------- commands

void cmd_synth(Run& r) {
  const std::size_t n = r.args.at("videos").get<std::size_t>();
  if (n < 4) throw UsageError("--videos must be at least 4 (one per split)");
  const SynthConfig sc = synth_config(r.cfg);
  Rng rng(r.seed());
  const Dataset ds = generate_dataset(sc, n, rng);
  const fs::path dir = r.str("out");
  save_dataset(dir, ds);
  for (const auto& v : ds.videos) {
    const fs::path p = dir / "videos" / (v.video_id + ".tcsl");
    r.outputs.push_back(p);
    if (v.labels) r.outputs.push_back(labels_path_for(p));
  }
  r.outputs.push_back(dir / "splits.txt");
  r.outputs.push_back(dir / "manifest.json");
  r.resolved["videos"] = n;
  *r.out << "wrote " << n << " videos to " << dir.string() << "\n";
}

void cmd_pretrain(Run& r) {
  const PretrainMethod method = method_arg(r.str("method"));
  const Dataset ds = load_dataset(r.str("data"));
  const auto unlabeled = videos_of(ds, "ABC");
  const double fps = common_fps(unlabeled);
  const PretrainConfig pc = pretrain_config(r.cfg, method, fps);
  Encoder enc = initial_encoder(r.cfg, unlabeled.front().feature_dim, r.seed());
  const PretrainResult res = run_pretrain(enc, r.cfg, method, unlabeled, r.seed());

  r.resolved["method"] = to_string(method);
  r.resolved["loss"] = to_string(loss_kind_for(method));
  r.resolved["training_videos"] = unlabeled.size();
  r.resolved["epochs"] = pc.epochs;
  r.resolved["batch_size"] = pc.batch_size;
  r.resolved["sampler"] = sampler_json(pc.sampler);
  r.resolved["margins"] = {{"contrastive", pc.loss.margin_contrastive},
                           {"ranking", pc.loss.margin_ranking},
                           {"second_order_weight", pc.loss.second_order_weight}};
  r.resolved["adam"] = adam_json(pc.adam);

  const fs::path out = r.str("out");
  json extra = {{"method", to_string(method)}, {"seed", r.seed()}, {"epochs", pc.epochs}};
  r.write(out, encode_checkpoint(make_checkpoint(enc, extra)));
  std::string csv = "epoch,mean_loss\n";
  for (std::size_t e = 0; e < res.epoch_loss.size(); ++e) csv += std::to_string(e + 1) + "," + fmt(res.epoch_loss[e]) + "\n";
  r.write(out.string() + ".loss.csv", csv);
  *r.out << "pretrained " << to_string(method) << " encoder on " << unlabeled.size() << " videos";
  if (!res.epoch_loss.empty()) *r.out << ", final epoch loss " << fmt(res.epoch_loss.back());
  *r.out << "\n";
}

void cmd_finetune(Run& r) {
  const std::string sets = r.str("labeled_sets");
  check_sets(sets);
  const Dataset ds = load_dataset(r.str("data"));
  const auto labeled = phase_videos_of(ds, sets, r.cfg);
  const std::size_t input_dim = labeled.front().feature_dim;
  const std::string init = r.str("init");
  Encoder enc = [&] {
    if (init.empty()) return initial_encoder(r.cfg, input_dim, r.seed());
    const EncoderArch arch = encoder_arch(r.cfg, input_dim);
    return encoder_from_checkpoint(load_checkpoint(init), &arch);
  }();
  PhaseModel model = assemble_phase_model(r.cfg, std::move(enc), r.seed());
  const FinetuneConfig fc = finetune_config(r.cfg);
  const FinetuneResult res = run_finetune(model, r.cfg, labeled, r.seed());

  r.resolved["labeled_videos"] = labeled.size();
  r.resolved["encoder_source"] = init.empty() ? "random initialisation" : "checkpoint encoder weights";
  r.resolved["frozen_encoder_layers"] = r.cfg.get_size("finetune.frozen_encoder_layers");
  r.resolved["finetune"] = finetune_json(fc, finetune_stride(r.cfg, ds.videos.front().fps));
  r.resolved["epochs_run"] = res.log.size();
  r.resolved["reached_stop"] = res.reached_stop;

  const fs::path out = r.str("out");
  json extra = {{"labeled_sets", sets}, {"seed", r.seed()}, {"init", init}, {"reached_stop", res.reached_stop}};
  r.write(out, encode_checkpoint(make_checkpoint(model, extra)));
  std::string csv = "epoch,train_accuracy,mean_loss,optimizer_steps\n";
  for (const auto& e : res.log)
    csv += std::to_string(e.epoch) + "," + fmt(e.train_accuracy) + "," + fmt(e.mean_loss) + "," +
           std::to_string(e.optimizer_steps) + "\n";
  r.write(out.string() + ".log.csv", csv);
  *r.out << "fine-tuned on " << labeled.size() << " videos for " << res.log.size() << " epochs"
         << (res.reached_stop ? " (stop accuracy reached)" : " (epoch cap reached)") << "\n";
}

void cmd_eval(Run& r) {
  const std::string model_path = r.str("model");
  if (!fs::exists(model_path)) throw DataError("model file not found: " + model_path);
  const Dataset ds = load_dataset(r.str("data"));
  const auto videos = phase_videos_of(ds, r.str("split"), r.cfg);
  const PhaseModel model = phase_model_from_checkpoint(load_checkpoint(model_path));
  const Evaluation ev = evaluate(model, videos);

  r.resolved["videos"] = videos.size();
  r.resolved["frame_stride"] = finetune_stride(r.cfg, ds.videos.front().fps);

  std::vector<std::string> ids;
  for (const auto& v : videos) ids.push_back(v.video_id);
  const fs::path out = r.str("out");
  const std::string table = report_table(ev.report, "split " + r.str("split"));
  r.write(out, report_csv(ev.report));
  r.write(out.string() + ".txt", table);
  r.write(out.string() + ".videos.csv", per_video_csv(ids, ev.per_video));
  *r.out << table;
}

void cmd_compare(Run& r) {
  const std::string sets = r.str("labeled_sets");
  check_sets(sets);
  const std::size_t k = r.args.at("seeds").get<std::size_t>();
  if (k == 0) throw UsageError("--seeds must be positive");
  CompareOptions opt;
  for (std::size_t i = 0; i < k; ++i) opt.seeds.push_back(r.seed() + i);
  opt.labeled_sets = sets;
  for (const auto& m : r.args.at("methods")) opt.methods.push_back(method_arg(m.get<std::string>()));
  // Thread count only affects scheduling; results do not depend on it.
  opt.threads = r.args.at("threads").get<std::size_t>();
  const Dataset ds = load_dataset(r.str("data"));
  const CompareResult res = run_compare(ds, r.cfg, opt);

  const double fps = ds.videos.front().fps;
  json methods = json::object();
  for (auto m : opt.methods) {
    const PretrainConfig pc = pretrain_config(r.cfg, m, fps);
    methods[std::string(to_string(m))] = {{"sampler", sampler_json(pc.sampler)}, {"adam", adam_json(pc.adam)}};
  }
  r.resolved["seeds"] = opt.seeds;
  r.resolved["pretrain"] = methods;
  r.resolved["finetune"] = finetune_json(finetune_config(r.cfg), finetune_stride(r.cfg, fps));
  r.resolved["training_runs"] = res.runs.size();

  const fs::path dir = r.str("out");
  fs::create_directories(dir);
  const std::string table = compare_summary_table(res, "labeled sets " + sets + ", test split D");
  r.write(dir / "summary.csv", compare_summary_csv(res));
  r.write(dir / "summary.txt", table);
  r.write(dir / "runs.csv", compare_runs_csv(res));
  *r.out << table;
}

// "video_id[:stride]" entries separated by commas.
std::vector<std::pair<std::string, std::size_t>> parse_query_spec(const std::string& spec) {
  std::vector<std::pair<std::string, std::size_t>> out;
  std::size_t pos = 0;
  while (pos <= spec.size()) {
    const auto comma = spec.find(',', pos);
    const std::string item = spec.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    pos = comma == std::string::npos ? spec.size() + 1 : comma + 1;
    if (item.empty()) throw UsageError("empty entry in --queries");
    const auto colon = item.rfind(':');
    std::size_t stride = 1;
    if (colon != std::string::npos) {
      try {
        std::size_t used = 0;
        const long long s = std::stoll(item.substr(colon + 1), &used);
        if (used != item.size() - colon - 1 || s < 1) throw std::invalid_argument(item);
        stride = static_cast<std::size_t>(s);
      } catch (const std::logic_error&) {
        throw UsageError("bad stride in --queries entry '" + item + "'");
      }
    }
    out.emplace_back(item.substr(0, colon), stride);
  }
  return out;
}

void cmd_retrieve(Run& r) {
  const auto spec = parse_query_spec(r.str("queries"));
  const Dataset ds = load_dataset(r.str("data"));
  const Encoder enc = encoder_from_checkpoint(load_checkpoint(r.str("model")));
  const bool include_self = r.args.at("include_self").get<bool>();

  std::vector<Query> queries;
  for (const auto& [id, stride] : spec) {
    auto it = std::find_if(ds.videos.begin(), ds.videos.end(), [&](const FrameSequence& v) { return v.video_id == id; });
    if (it == ds.videos.end()) throw DataError("query video not in dataset: " + id);
    std::vector<std::size_t> frames;
    for (std::size_t t = 0; t < it->frames(); t += stride) frames.push_back(t);
    auto q = make_queries(*it, frames);
    queries.insert(queries.end(), q.begin(), q.end());
  }
  std::vector<FrameSequence> corpus;
  for (auto& v : videos_of(ds, r.str("split"))) {
    const bool is_query = std::any_of(spec.begin(), spec.end(), [&](const auto& s) { return s.first == v.video_id; });
    if (include_self || !is_query) corpus.push_back(std::move(v));
  }
  if (corpus.empty()) throw DataError("retrieval corpus is empty");
  const RetrievalReport rep = retrieval_report(queries, corpus, enc);

  r.resolved["queries"] = queries.size();
  r.resolved["corpus_videos"] = corpus.size();
  const fs::path out = r.str("out");
  std::string summary = "queries," + std::to_string(queries.size()) + "\ncorpus_videos," +
                        std::to_string(corpus.size()) + "\ncompared," + std::to_string(rep.compared) +
                        "\nphase_agreement," + (rep.phase_agreement ? fmt(*rep.phase_agreement) : "") + "\n";
  r.write(out, retrieval_csv(rep));
  r.write(out.string() + ".summary.csv", summary);
  *r.out << "phase agreement: " << (rep.phase_agreement ? fmt(*rep.phase_agreement) : "n/a") << " over "
         << rep.compared << " matches\n";
}

using Handler = void (*)(Run&);

Handler handler_for(const std::string& command) {
  if (command == "synth") return cmd_synth;
  if (command == "pretrain") return cmd_pretrain;
  if (command == "finetune") return cmd_finetune;
  if (command == "eval") return cmd_eval;
  if (command == "compare") return cmd_compare;
  if (command == "retrieve") return cmd_retrieve;
  throw UsageError("unknown command '" + command + "'");
}

// Runs a command and writes its manifest next to its outputs.
void execute(Run& r) {
  const auto start = std::chrono::steady_clock::now();
  handler_for(r.command)(r);
  RunManifest m;
  m.command = r.command;
  m.args = r.args;
  m.preset = r.cfg.preset_name();
  m.config = r.cfg.values();
  m.resolved = r.resolved;
  for (const auto& p : r.outputs) m.outputs.push_back(p.string());
  m.duration_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  write_file_atomic(run_manifest_path(r.command, r.str("out")), m.encode());
}

// Maps an output recorded under `old_out` to the same place under `new_out`.
fs::path relocate(const std::string& path, const std::string& old_out, const std::string& new_out) {
  if (path.compare(0, old_out.size(), old_out) != 0) throw DataError("output outside --out: " + path);
  return new_out + path.substr(old_out.size());
}

int replay(const std::string& manifest_path, std::string new_out, bool check, std::ostream& out) {
  const RunManifest m = RunManifest::decode(read_file(manifest_path));
  Run r;
  r.command = m.command;
  r.args = m.args;
  r.cfg = Config::preset(m.preset);
  for (const auto& [k, v] : m.config) r.cfg.set(k, v);
  r.out = &out;
  const std::string old_out = r.str("out");
  fs::path scratch;
  if (check && new_out.empty()) {
    scratch = fs::temp_directory_path() /
              ("tcssl-replay-" + std::to_string(std::chrono::steady_clock::now().time_since_epoch().count()));
    fs::create_directories(scratch);
    new_out = (scratch / fs::path(old_out).filename()).string();
  }
  if (!new_out.empty()) r.args["out"] = new_out;
  execute(r);
  if (!check) return kExitOk;

  std::size_t differing = 0;
  for (const auto& recorded : m.outputs) {
    const std::string p = recorded.get<std::string>();
    const fs::path fresh = relocate(p, old_out, r.str("out"));
    const bool same = fs::exists(p) && fs::exists(fresh) && read_file(p) == read_file(fresh);
    if (!same) {
      ++differing;
      out << "differs: " << p << "\n";
    }
  }
  out << (differing == 0 ? "identical" : "MISMATCH") << ": " << m.outputs.size() - differing << "/"
      << m.outputs.size() << " outputs reproduced byte-for-byte\n";
  if (!scratch.empty()) fs::remove_all(scratch);
  return differing == 0 ? kExitOk : kExitData;
}

}  // namespace

fs::path run_manifest_path(const std::string& command, const fs::path& out) {
  if (command == "synth" || command == "compare") return out / "run.json";
  return fs::path(out.string() + ".run.json");
}

int cli_main(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Temporal-coherence pretraining for phase segmentation"};
  app.require_subcommand(1);

  CommonOptions common;
  Run run;
  run.out = &out;
  std::string out_path, data, method, labeled_sets = "A", init, model, split = "D", queries;
  std::size_t videos = 0, seeds = 5, threads = 1;
  std::uint64_t seed = 0;
  std::vector<std::string> methods{"contrastive2"};
  bool include_self = false;

  auto* synth = app.add_subcommand("synth", "Generate a synthetic dataset");
  synth->add_option("--out", out_path, "Dataset directory")->required();
  synth->add_option("--videos", videos, "Number of videos (>= 4)")->required();
  synth->add_option("--seed", seed)->required();
  add_common(synth, common);

  auto* pre = app.add_subcommand("pretrain", "Self-supervised encoder pretraining on sets A, B and C");
  pre->add_option("--data", data)->required();
  pre->add_option("--method", method, "contrastive, ranking or contrastive2")->required();
  pre->add_option("--out", out_path, "Checkpoint path")->required();
  pre->add_option("--seed", seed)->required();
  add_common(pre, common);

  auto* ft = app.add_subcommand("finetune", "Supervised training of the phase model");
  ft->add_option("--data", data)->required();
  ft->add_option("--labeled-sets", labeled_sets, "A, AB or ABC")->capture_default_str();
  ft->add_option("--init", init, "Pretrained checkpoint; only its encoder weights are used");
  ft->add_option("--out", out_path, "Checkpoint path")->required();
  ft->add_option("--seed", seed)->required();
  add_common(ft, common);

  auto* ev = app.add_subcommand("eval", "Evaluate a phase model on a split");
  ev->add_option("--data", data)->required();
  ev->add_option("--model", model)->required();
  ev->add_option("--split", split)->capture_default_str();
  ev->add_option("--out", out_path, "Report CSV path (.txt table and .videos.csv written alongside)")->required();
  add_common(ev, common);

  auto* cmp = app.add_subcommand("compare", "Baseline vs pretrained arms over several seeds");
  cmp->add_option("--data", data)->required();
  cmp->add_option("--seeds", seeds, "Number of seeds")->capture_default_str();
  cmp->add_option("--seed", seed, "First seed")->capture_default_str();
  cmp->add_option("--labeled-sets", labeled_sets)->capture_default_str();
  cmp->add_option("--methods", methods)->delimiter(',')->capture_default_str();
  cmp->add_option("--threads", threads)->capture_default_str();
  cmp->add_option("--out", out_path, "Output directory")->required();
  add_common(cmp, common);

  auto* ret = app.add_subcommand("retrieve", "Nearest-frame retrieval across videos");
  ret->add_option("--data", data)->required();
  ret->add_option("--model", model, "Encoder or phase-model checkpoint")->required();
  ret->add_option("--queries", queries, "video_id[:stride], comma separated")->required();
  ret->add_option("--split", split, "Corpus split(s)")->capture_default_str();
  ret->add_flag("--include-self", include_self, "Also search the query's own video");
  ret->add_option("--out", out_path, "CSV path")->required();
  add_common(ret, common);

  std::string manifest;
  bool check = false;
  auto* rep = app.add_subcommand("replay", "Re-run a command from its run manifest");
  rep->add_option("--manifest", manifest)->required();
  rep->add_option("--out", out_path, "Write outputs here instead of the recorded location");
  rep->add_flag("--check", check, "Compare the fresh outputs with the recorded ones");

  std::vector<std::string> reversed(argv.rbegin(), argv.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (rep->parsed()) return replay(manifest, out_path, check, out);

    CLI::App* sub = app.get_subcommands().front();
    run.command = sub->get_name();
    json& a = run.args;
    a["out"] = out_path;
    if (sub == synth) {
      a["videos"] = videos;
      a["seed"] = seed;
    } else if (sub == pre) {
      a["data"] = data;
      a["method"] = method;
      a["seed"] = seed;
    } else if (sub == ft) {
      a["data"] = data;
      a["labeled_sets"] = labeled_sets;
      a["init"] = init;
      a["seed"] = seed;
    } else if (sub == ev) {
      a["data"] = data;
      a["model"] = model;
      a["split"] = split;
    } else if (sub == cmp) {
      a["data"] = data;
      a["seeds"] = seeds;
      a["seed"] = seed;
      a["labeled_sets"] = labeled_sets;
      a["methods"] = methods;
      a["threads"] = threads;
    } else if (sub == ret) {
      a["data"] = data;
      a["model"] = model;
      a["queries"] = queries;
      a["split"] = split;
      a["include_self"] = include_self;
    }
    run.cfg = resolve_config(common);
    execute(run);
    return kExitOk;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const nlohmann::json::exception& e) {
    err << "error: malformed manifest: " << e.what() << "\n";
    return kExitData;
  }
}

}  // namespace tcssl
