#include "tcssl/dataset_io.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include "tcssl/errors.hpp"

namespace tcssl {

namespace fs = std::filesystem;

namespace {

class ByteWriter {
 public:
  void raw(const void* data, std::size_t n) { out_.append(static_cast<const char*>(data), n); }
  void u8(std::uint8_t v) { out_.push_back(static_cast<char>(v)); }
  void u16(std::uint16_t v) { put_le(v, 2); }
  void u32(std::uint32_t v) { put_le(v, 4); }
  void u64(std::uint64_t v) { put_le(v, 8); }
  void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void str(const std::string& s) {
    u32(static_cast<std::uint32_t>(s.size()));
    raw(s.data(), s.size());
  }
  std::string take() { return std::move(out_); }

 private:
  void put_le(std::uint64_t v, int bytes) {
    for (int i = 0; i < bytes; ++i) out_.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
  }
  std::string out_;
};

class ByteReader {
 public:
  ByteReader(const std::string& bytes, std::string what) : bytes_(bytes), what_(std::move(what)) {}

  std::size_t offset() const { return pos_; }
  bool at_end() const { return pos_ == bytes_.size(); }

  void need(std::size_t n, const char* field) {
    if (bytes_.size() - pos_ < n)
      throw FormatError(what_ + ": truncated at byte offset " + std::to_string(pos_) + " while reading " + field +
                        " (need " + std::to_string(n) + " bytes, " + std::to_string(bytes_.size() - pos_) +
                        " left)");
  }
  std::string raw(std::size_t n, const char* field) {
    need(n, field);
    std::string s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  std::uint64_t le(int n, const char* field) {
    need(static_cast<std::size_t>(n), field);
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    pos_ += static_cast<std::size_t>(n);
    return v;
  }
  std::uint8_t u8(const char* f) { return static_cast<std::uint8_t>(le(1, f)); }
  std::uint16_t u16(const char* f) { return static_cast<std::uint16_t>(le(2, f)); }
  std::uint32_t u32(const char* f) { return static_cast<std::uint32_t>(le(4, f)); }
  std::uint64_t u64(const char* f) { return le(8, f); }
  float f32(const char* f) { return std::bit_cast<float>(u32(f)); }
  double f64(const char* f) { return std::bit_cast<double>(u64(f)); }
  std::string str(const char* f) { return raw(u32(f), f); }

  [[noreturn]] void fail(const std::string& msg) const {
    throw FormatError(what_ + ": " + msg + " at byte offset " + std::to_string(pos_));
  }

 private:
  const std::string& bytes_;
  std::string what_;
  std::size_t pos_ = 0;
};

char split_char(Split s) { return static_cast<char>(s); }

Split parse_split(const std::string& s) {
  if (s == "A") return Split::A;
  if (s == "B") return Split::B;
  if (s == "C") return Split::C;
  if (s == "D") return Split::D;
  throw DataError("unknown split '" + s + "'");
}

}  // namespace

void write_file_atomic(const fs::path& path, const std::string& bytes) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw DataError("write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string encode_features(const FrameSequence& video) {
  video.validate();
  ByteWriter w;
  w.raw("TCSL", 4);
  w.u16(kFeatureFormatVersion);
  w.str(video.video_id);
  w.u32(static_cast<std::uint32_t>(video.frames()));
  w.u32(static_cast<std::uint32_t>(video.feature_dim));
  w.f32(static_cast<float>(video.fps));
  for (float v : video.features) w.f32(v);
  return w.take();
}

FrameSequence decode_features(const std::string& bytes) {
  ByteReader r(bytes, "feature file");
  if (r.raw(4, "magic") != "TCSL") throw FormatError("feature file: bad magic bytes at byte offset 0");
  const auto version = r.u16("version");
  if (version != kFeatureFormatVersion)
    throw FormatError("feature file: unsupported version " + std::to_string(version));
  FrameSequence v;
  v.video_id = r.str("video_id");
  const std::uint32_t frames = r.u32("frame count");
  v.feature_dim = r.u32("feature dimension");
  v.fps = r.f32("fps");
  if (v.feature_dim == 0) r.fail("zero feature dimension");
  const std::size_t count = static_cast<std::size_t>(frames) * v.feature_dim;
  r.need(count * 4, "feature values");
  v.features.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    v.features[i] = r.f32("feature value");
    if (!std::isfinite(v.features[i])) r.fail("non-finite feature value");
  }
  if (!r.at_end()) r.fail("trailing bytes");
  return v;
}

std::string encode_labels(const std::vector<int>& labels) {
  std::string out = "frame_index,phase_id\n";
  for (std::size_t i = 0; i < labels.size(); ++i) out += std::to_string(i) + "," + std::to_string(labels[i]) + "\n";
  return out;
}

std::optional<std::vector<int>> decode_labels(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) return std::nullopt;
  if (line != "frame_index,phase_id") throw FormatError("labels: expected header 'frame_index,phase_id'");
  std::vector<int> labels;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw FormatError("labels: malformed line " + std::to_string(line_no));
    try {
      const long frame = std::stol(line.substr(0, comma));
      const int phase = std::stoi(line.substr(comma + 1));
      if (frame != static_cast<long>(labels.size()))
        throw FormatError("labels: frame index " + std::to_string(frame) + " out of sequence on line " +
                          std::to_string(line_no));
      labels.push_back(phase);
    } catch (const std::logic_error&) {
      throw FormatError("labels: malformed line " + std::to_string(line_no));
    }
  }
  if (labels.empty()) return std::nullopt;
  return labels;
}

fs::path labels_path_for(const fs::path& features_path) {
  fs::path p = features_path;
  p.replace_extension(".labels.csv");
  return p;
}

void write_video(const fs::path& path, const FrameSequence& video) {
  write_file_atomic(path, encode_features(video));
  if (video.labels) write_file_atomic(labels_path_for(path), encode_labels(*video.labels));
}

FrameSequence read_video(const fs::path& path) {
  FrameSequence v = decode_features(read_file(path));
  const fs::path lp = labels_path_for(path);
  if (fs::exists(lp)) v.labels = decode_labels(read_file(lp));
  if (v.labels && v.labels->size() != v.frames())
    throw DataError(path.string() + ": " + std::to_string(v.labels->size()) + " labels for " +
                    std::to_string(v.frames()) + " frames");
  return v;
}

std::string encode_splits(const DatasetManifest& manifest) {
  std::string out;
  for (const auto& e : manifest.videos) out += e.video_id + "," + split_char(e.split) + "\n";
  return out;
}

std::vector<std::pair<std::string, Split>> decode_splits(const std::string& text) {
  std::vector<std::pair<std::string, Split>> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto comma = line.rfind(',');
    if (comma == std::string::npos) throw FormatError("splits: malformed line '" + line + "'");
    out.emplace_back(line.substr(0, comma), parse_split(line.substr(comma + 1)));
  }
  return out;
}

std::string encode_manifest(const DatasetManifest& manifest) {
  nlohmann::ordered_json j;
  j["format"] = "tcssl-dataset";
  j["version"] = 1;
  j["provenance"] = manifest.provenance.empty() ? nlohmann::ordered_json::object()
                                                : nlohmann::ordered_json::parse(manifest.provenance);
  auto& videos = j["videos"] = nlohmann::ordered_json::array();
  for (const auto& e : manifest.videos) {
    nlohmann::ordered_json v;
    v["video_id"] = e.video_id;
    v["frames"] = e.frames;
    v["fps"] = e.fps;
    v["feature_dim"] = e.feature_dim;
    v["has_labels"] = e.has_labels;
    v["split"] = std::string(1, split_char(e.split));
    v["features"] = "videos/" + e.video_id + ".tcsl";
    videos.push_back(std::move(v));
  }
  return j.dump(2) + "\n";
}

void save_dataset(const fs::path& dir, const Dataset& dataset) {
  if (dataset.videos.size() != dataset.manifest.videos.size())
    throw ContractError("dataset manifest does not list every video");
  for (const auto& v : dataset.videos) write_video(dir / "videos" / (v.video_id + ".tcsl"), v);
  write_file_atomic(dir / "splits.txt", encode_splits(dataset.manifest));
  write_file_atomic(dir / "manifest.json", encode_manifest(dataset.manifest));
}

Dataset load_dataset(const fs::path& dir) {
  if (!fs::exists(dir / "manifest.json")) throw DataError("no dataset manifest in " + dir.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(dir / "manifest.json"));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("manifest.json: " + std::string(e.what()));
  }
  Dataset ds;
  ds.manifest.provenance = j.value("provenance", nlohmann::json::object()).dump();
  std::map<std::string, Split> split_file;
  if (fs::exists(dir / "splits.txt"))
    for (auto& [id, s] : decode_splits(read_file(dir / "splits.txt"))) split_file[id] = s;
  for (const auto& v : j.at("videos")) {
    VideoEntry e;
    e.video_id = v.at("video_id").get<std::string>();
    e.frames = v.at("frames").get<std::size_t>();
    e.fps = v.at("fps").get<double>();
    e.feature_dim = v.at("feature_dim").get<std::size_t>();
    e.has_labels = v.at("has_labels").get<bool>();
    e.split = parse_split(v.at("split").get<std::string>());
    if (auto it = split_file.find(e.video_id); it != split_file.end() && it->second != e.split)
      throw DataError(e.video_id + ": splits.txt disagrees with manifest.json");
    FrameSequence seq = read_video(dir / v.at("features").get<std::string>());
    if (seq.video_id != e.video_id || seq.frames() != e.frames || seq.feature_dim != e.feature_dim)
      throw DataError(e.video_id + ": feature file header does not match the manifest");
    if (e.has_labels != seq.labels.has_value())
      throw DataError(e.video_id + ": label presence does not match the manifest");
    ds.videos.push_back(std::move(seq));
    ds.manifest.videos.push_back(std::move(e));
  }
  return ds;
}

// ---------------------------------------------------------------------------
// Checkpoints

namespace {

nlohmann::ordered_json encoder_arch_json(const EncoderArch& a) {
  nlohmann::ordered_json j;
  j["input_dim"] = a.input_dim;
  j["hidden"] = a.hidden;
  j["embedding_dim"] = a.embedding_dim;
  return j;
}

EncoderArch encoder_arch_from(const nlohmann::ordered_json& j) {
  EncoderArch a;
  a.input_dim = j.at("input_dim").get<std::size_t>();
  a.hidden = j.at("hidden").get<std::vector<std::size_t>>();
  a.embedding_dim = j.at("embedding_dim").get<std::size_t>();
  return a;
}

Checkpoint make_checkpoint_from(const ConstParamRefs& params, nlohmann::ordered_json meta, nlohmann::ordered_json extra,
                                const AdamState* optimizer) {
  Checkpoint c;
  for (auto& [k, v] : extra.items()) meta[k] = v;
  c.metadata = std::move(meta);
  for (const Tensor* t : params) c.tensors.push_back(*t);
  if (optimizer != nullptr) c.optimizer = *optimizer;
  return c;
}

void restore_tensors(const Checkpoint& ckpt, const ParamRefs& params, std::size_t offset) {
  if (ckpt.tensors.size() < offset + params.size()) throw FormatError("checkpoint: missing tensors");
  for (std::size_t i = 0; i < params.size(); ++i) {
    const Tensor& src = ckpt.tensors[offset + i];
    Tensor& dst = *params[i];
    if (src.name != dst.name || src.shape != dst.shape)
      throw DataError("checkpoint shape mismatch for " + dst.name + ": stored " + src.name);
    dst.values = src.values;
    dst.trainable = src.trainable;
  }
}

void check_version(const Checkpoint& ckpt) {
  if (ckpt.metadata.value("format_version", 0) != kCheckpointFormatVersion)
    throw FormatError("checkpoint: metadata version mismatch");
}

}  // namespace

std::string encode_checkpoint(const Checkpoint& ckpt) {
  ByteWriter w;
  w.raw("TCSC", 4);
  w.u16(kCheckpointFormatVersion);
  w.u32(static_cast<std::uint32_t>(ckpt.tensors.size()));
  for (const Tensor& t : ckpt.tensors) {
    w.str(t.name);
    w.str(t.layer);
    w.u8(t.trainable ? 1 : 0);
    w.u32(static_cast<std::uint32_t>(t.fan_in));
    w.u32(static_cast<std::uint32_t>(t.shape.size()));
    for (std::size_t d : t.shape) w.u32(static_cast<std::uint32_t>(d));
    for (double v : t.values) w.f64(v);
  }
  w.u8(ckpt.optimizer ? 1 : 0);
  if (ckpt.optimizer) {
    const AdamState& s = *ckpt.optimizer;
    w.f64(s.config.learning_rate);
    w.f64(s.config.beta1);
    w.f64(s.config.beta2);
    w.f64(s.config.epsilon);
    w.u64(s.step);
    for (std::size_t i = 0; i < ckpt.tensors.size(); ++i) {
      for (double v : s.first_moment.at(i)) w.f64(v);
      for (double v : s.second_moment.at(i)) w.f64(v);
    }
  }
  nlohmann::ordered_json meta = ckpt.metadata;
  meta["format_version"] = kCheckpointFormatVersion;
  w.str(meta.dump());
  return w.take();
}

Checkpoint decode_checkpoint(const std::string& bytes) {
  ByteReader r(bytes, "checkpoint");
  if (r.raw(4, "magic") != "TCSC") throw FormatError("checkpoint: bad magic bytes at byte offset 0");
  const auto version = r.u16("version");
  if (version != kCheckpointFormatVersion)
    throw FormatError("checkpoint: unsupported version " + std::to_string(version) + " (expected " +
                      std::to_string(kCheckpointFormatVersion) + ")");
  Checkpoint c;
  const std::uint32_t count = r.u32("tensor count");
  for (std::uint32_t i = 0; i < count; ++i) {
    Tensor t;
    t.name = r.str("tensor name");
    t.layer = r.str("tensor layer");
    t.trainable = r.u8("trainable flag") != 0;
    t.fan_in = r.u32("fan-in");
    const std::uint32_t rank = r.u32("rank");
    for (std::uint32_t k = 0; k < rank; ++k) t.shape.push_back(r.u32("dimension"));
    const std::size_t n = shape_size(t.shape);
    r.need(n * 8, "tensor values");
    t.values.resize(n);
    for (double& v : t.values) {
      v = r.f64("tensor value");
      if (!std::isfinite(v)) r.fail("non-finite parameter in " + t.name);
    }
    c.tensors.push_back(std::move(t));
  }
  if (r.u8("optimizer flag") != 0) {
    AdamState s;
    s.config.learning_rate = r.f64("learning rate");
    s.config.beta1 = r.f64("beta1");
    s.config.beta2 = r.f64("beta2");
    s.config.epsilon = r.f64("epsilon");
    s.step = r.u64("step");
    for (const Tensor& t : c.tensors) {
      std::vector<double> m(t.size()), v(t.size());
      for (double& x : m) x = r.f64("first moment");
      for (double& x : v) x = r.f64("second moment");
      s.first_moment.push_back(std::move(m));
      s.second_moment.push_back(std::move(v));
    }
    c.optimizer = std::move(s);
  }
  const std::string meta = r.str("metadata");
  if (!r.at_end()) r.fail("trailing bytes");
  try {
    c.metadata = nlohmann::ordered_json::parse(meta);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("checkpoint: metadata is not valid JSON: ") + e.what());
  }
  check_version(c);
  return c;
}

Checkpoint make_checkpoint(const Encoder& encoder, nlohmann::ordered_json extra, const AdamState* optimizer) {
  nlohmann::ordered_json meta;
  meta["format_version"] = kCheckpointFormatVersion;
  meta["kind"] = "encoder";
  meta["encoder"] = encoder_arch_json(encoder.arch());
  return make_checkpoint_from(encoder.parameters(), std::move(meta), std::move(extra), optimizer);
}

Checkpoint make_checkpoint(const PhaseModel& model, nlohmann::ordered_json extra, const AdamState* optimizer) {
  nlohmann::ordered_json meta;
  meta["format_version"] = kCheckpointFormatVersion;
  meta["kind"] = "phase_model";
  meta["encoder"] = encoder_arch_json(model.arch().encoder);
  meta["lstm_hidden"] = model.hidden();
  meta["num_phases"] = model.num_phases();
  return make_checkpoint_from(model.parameters(), std::move(meta), std::move(extra), optimizer);
}

void save_checkpoint(const fs::path& path, const Checkpoint& ckpt) { write_file_atomic(path, encode_checkpoint(ckpt)); }

Checkpoint load_checkpoint(const fs::path& path) {
  if (!fs::exists(path)) throw DataError("checkpoint not found: " + path.string());
  return decode_checkpoint(read_file(path));
}

Encoder encoder_from_checkpoint(const Checkpoint& ckpt, const EncoderArch* expected) {
  check_version(ckpt);
  const EncoderArch arch = encoder_arch_from(ckpt.metadata.at("encoder"));
  if (expected != nullptr && !(arch == *expected))
    throw DataError("checkpoint encoder shape mismatch: stored input_dim " + std::to_string(arch.input_dim) +
                    ", embedding_dim " + std::to_string(arch.embedding_dim) + "; expected input_dim " +
                    std::to_string(expected->input_dim) + ", embedding_dim " +
                    std::to_string(expected->embedding_dim));
  Encoder enc(arch);
  restore_tensors(ckpt, enc.parameters(), 0);
  return enc;
}

PhaseModel phase_model_from_checkpoint(const Checkpoint& ckpt, const PhaseArch* expected) {
  check_version(ckpt);
  if (ckpt.metadata.value("kind", "") != "phase_model") throw DataError("checkpoint does not hold a phase model");
  PhaseArch arch{encoder_arch_from(ckpt.metadata.at("encoder")), ckpt.metadata.at("lstm_hidden").get<std::size_t>(),
                 ckpt.metadata.at("num_phases").get<std::size_t>()};
  if (expected != nullptr && !(arch == *expected)) throw DataError("checkpoint phase-model shape mismatch");
  PhaseModel model(arch);
  const ParamRefs params = model.parameters();
  if (ckpt.tensors.size() != params.size()) throw DataError("checkpoint tensor count mismatch");
  restore_tensors(ckpt, params, 0);
  if (ckpt.optimizer && ckpt.optimizer->first_moment.size() != params.size())
    throw DataError("checkpoint optimizer state does not match the model");
  return model;
}

}  // namespace tcssl
