#include <doctest.h>

#include <cmath>
#include <fstream>
#include <limits>

#include "support/tempdir.hpp"
#include "tcssl/dataset_io.hpp"
#include "tcssl/errors.hpp"

using namespace tcssl;
namespace fs = std::filesystem;

namespace {

Dataset small_dataset(std::uint64_t seed, std::size_t n = 8) {
  Rng rng(seed);
  return generate_dataset(SynthConfig{}, n, rng);
}

bool message_has(const std::function<void()>& f, const std::string& needle) {
  try {
    f();
  } catch (const std::exception& e) {
    return std::string(e.what()).find(needle) != std::string::npos;
  }
  return false;
}

}  // namespace

TEST_CASE("feature files round-trip bit for bit") {
  const auto ds = small_dataset(1);
  for (const auto& v : ds.videos) {
    FrameSequence back = decode_features(encode_features(v));
    back.labels = decode_labels(encode_labels(*v.labels));
    CHECK(back == v);
  }
  TempDir dir;
  write_video(dir / "x.tcsl", ds.videos[0]);
  CHECK(fs::exists(dir / "x.labels.csv"));
  CHECK(labels_path_for(dir / "x.tcsl") == dir / "x.labels.csv");
  CHECK(read_video(dir / "x.tcsl") == ds.videos[0]);

  FrameSequence unlabeled = ds.videos[1];
  unlabeled.labels.reset();
  write_video(dir / "u.tcsl", unlabeled);
  CHECK(!fs::exists(dir / "u.labels.csv"));
  CHECK(!read_video(dir / "u.tcsl").labels);
}

TEST_CASE("feature file layout") {
  FrameSequence v;
  v.video_id = "ab";
  v.fps = 5;
  v.feature_dim = 2;
  v.features = {1.0f, -2.0f, 0.5f, 4.0f};
  const std::string bytes = encode_features(v);
  CHECK(bytes.size() == 4 + 2 + 4 + 2 + 4 + 4 + 4 + 4 * 4);
  CHECK(bytes.substr(0, 4) == "TCSL");
  CHECK(static_cast<unsigned char>(bytes[4]) == 1);  // version, little-endian
  CHECK(static_cast<unsigned char>(bytes[5]) == 0);
  CHECK(static_cast<unsigned char>(bytes[6]) == 2);  // id length
  CHECK(bytes.substr(10, 2) == "ab");
}

TEST_CASE("corrupt feature files are rejected with a byte offset") {
  const auto v = small_dataset(2).videos[0];
  const std::string bytes = encode_features(v);
  CHECK_THROWS_AS(decode_features(bytes.substr(0, bytes.size() - 3)), FormatError);
  CHECK(message_has([&] { decode_features(bytes.substr(0, bytes.size() - 3)); }, "byte offset"));
  CHECK(message_has([&] { decode_features(bytes.substr(0, 7)); }, "byte offset"));
  CHECK(message_has([&] { decode_features(bytes + "x"); }, "trailing"));
  std::string bad_magic = bytes;
  bad_magic[0] = 'X';
  CHECK_THROWS_AS(decode_features(bad_magic), FormatError);
  std::string bad_version = bytes;
  bad_version[4] = 9;
  CHECK_THROWS_AS(decode_features(bad_version), FormatError);

  FrameSequence inf = v;
  inf.features[3] = std::numeric_limits<float>::infinity();
  CHECK_THROWS_AS(decode_features(encode_features(inf)), FormatError);
}

TEST_CASE("label sidecars") {
  CHECK(!decode_labels("").has_value());
  CHECK(!decode_labels("frame_index,phase_id\n").has_value());
  CHECK(*decode_labels("frame_index,phase_id\n0,3\n1,3\n2,4\n") == std::vector<int>{3, 3, 4});
  CHECK_THROWS_AS(decode_labels("frame,phase\n0,1\n"), FormatError);
  CHECK_THROWS_AS(decode_labels("frame_index,phase_id\n0,1\n2,1\n"), FormatError);
  CHECK_THROWS_AS(decode_labels("frame_index,phase_id\n0;1\n"), FormatError);

  TempDir dir;
  auto v = small_dataset(3).videos[0];
  write_video(dir / "v.tcsl", v);
  std::ofstream(dir / "v.labels.csv", std::ios::trunc) << "";
  CHECK(!read_video(dir / "v.tcsl").labels);
  std::ofstream(dir / "v.labels.csv", std::ios::trunc) << "frame_index,phase_id\n0,1\n";
  CHECK_THROWS_AS(read_video(dir / "v.tcsl"), DataError);
}

TEST_CASE("datasets round-trip through a directory") {
  const auto ds = small_dataset(4);
  TempDir dir;
  save_dataset(dir.path(), ds);
  CHECK(fs::exists(dir / "manifest.json"));
  CHECK(fs::exists(dir / "splits.txt"));
  const auto back = load_dataset(dir.path());
  CHECK(back.videos == ds.videos);
  REQUIRE(back.manifest.videos.size() == ds.manifest.videos.size());
  for (std::size_t i = 0; i < ds.videos.size(); ++i) CHECK(back.manifest.videos[i].split == ds.manifest.videos[i].split);
  CHECK(back.select("A").size() == 2);

  const auto splits = decode_splits(encode_splits(ds.manifest));
  CHECK(splits.size() == 8);
  CHECK(splits[0].first == "video_000");
  CHECK_THROWS_AS(decode_splits("video_000,E\n"), DataError);

  std::ofstream(dir / "splits.txt", std::ios::trunc) << "video_000,D\n";
  if (ds.manifest.videos[0].split != Split::D) CHECK_THROWS_AS(load_dataset(dir.path()), DataError);
  TempDir empty;
  CHECK_THROWS_AS(load_dataset(empty.path()), DataError);
}

TEST_CASE("checkpoints round-trip and restore models exactly") {
  Rng rng(5);
  PhaseModel m(PhaseArch{EncoderArch{16, {12, 10}, 8}, 6, 7});
  init_uniform_fan(m.parameters(), rng);
  set_layer_trainable(m.parameters(), "encoder.0", false);
  AdamState st = AdamState::for_parameters(tcssl::as_const(m.parameters()), AdamConfig{});
  st.step = 3;
  st.first_moment[0][0] = 0.25;

  const Checkpoint ck = make_checkpoint(m, {{"note", "x"}}, &st);
  const Checkpoint back = decode_checkpoint(encode_checkpoint(ck));
  CHECK(encode_checkpoint(back) == encode_checkpoint(ck));
  CHECK(back.metadata.at("note") == "x");
  REQUIRE(back.optimizer);
  CHECK(back.optimizer->step == 3);
  CHECK(back.optimizer->first_moment[0][0] == 0.25);

  const PhaseModel restored = phase_model_from_checkpoint(back);
  const auto a = m.parameters();
  const auto b = restored.parameters();
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i]->values == b[i]->values);
    CHECK(a[i]->trainable == b[i]->trainable);
    CHECK(a[i]->name == b[i]->name);
  }

  // The encoder can be pulled out of either checkpoint kind.
  const Encoder enc = encoder_from_checkpoint(back);
  CHECK(enc.weight(1).values == m.encoder().weight(1).values);
  const Checkpoint ek = make_checkpoint(m.encoder());
  CHECK(encoder_from_checkpoint(decode_checkpoint(encode_checkpoint(ek))).weight(0).values ==
        m.encoder().weight(0).values);
  CHECK_THROWS_AS(phase_model_from_checkpoint(ek), DataError);

  const EncoderArch other{16, {64}, 32};
  CHECK_THROWS_AS(encoder_from_checkpoint(back, &other), DataError);

  TempDir dir;
  save_checkpoint(dir / "m.ckpt", ck);
  CHECK(encode_checkpoint(load_checkpoint(dir / "m.ckpt")) == encode_checkpoint(ck));
  CHECK_THROWS_AS(load_checkpoint(dir / "missing.ckpt"), DataError);
  const std::string bytes = encode_checkpoint(ck);
  CHECK_THROWS_AS(decode_checkpoint(bytes.substr(0, bytes.size() / 2)), FormatError);
}
